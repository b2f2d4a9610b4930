# -*- coding: utf-8 -*-
import os
import codecs
from setuptools import setup, Command

def readfile(filename):
    with codecs.open(filename,  encoding='utf-8') as f:
        return f.read()

class TestCommand(Command):
    user_options = []

    def initialize_options(self):
        pass

    def finalize_options(self):
        pass

    def run(self):
        import subprocess

        if subprocess.call(['python', '-m', 'pytest', '--doctest-modules', 'skelgraph/', 'test/']):
            raise SystemExit("Test failures")


setup(
    name='skelgraph',
    version=readfile("VERSION").strip(),
    description='A Python module to synthesize 3D skeleton graphs from point clouds with differentiable graph construction',
    long_description=readfile("README.rst"),
    # Remember to update these if the directory structure changes.
    packages=['skelgraph'],
    install_requires=['six', 'numpy', 'scipy'],
    extras_require={'progress': ['tqdm'], 'test': ['pytest']},
    entry_points={'console_scripts': ['skelgraph = skelgraph.__main__:main']},
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: GNU General Public License v3 (GPLv3)',
        'Natural Language :: English',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
        ],
    cmdclass = {'test': TestCommand}
)
