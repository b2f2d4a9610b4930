# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.

import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join('..', '..')))

# -- Project information -----------------------------------------------------

project = u'skelgraph'
copyright = u'2026, the skelgraph developers'
author = u'the skelgraph developers'

with open(os.path.join('..', '..', 'VERSION')) as f:
    release = f.read().strip()
version = release

# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'
language = None
exclude_patterns = []
pygments_style = 'sphinx'

# -- Options for HTML output -------------------------------------------------

html_theme = 'default'
html_static_path = ['_static']
htmlhelp_basename = 'skelgraphdoc'

# -- Options for LaTeX output ------------------------------------------------

latex_elements = {
}

latex_documents = [
    (master_doc, 'skelgraph.tex', u'skelgraph Documentation',
     author, 'manual'),
]

# -- Options for manual page output ------------------------------------------

man_pages = [
    (master_doc, 'skelgraph', u'skelgraph Documentation',
     [author], 1)
]
