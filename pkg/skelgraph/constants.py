r"""
Various constants defined for skeleton synthesis.

EXAMPLES::

    >>> from skelgraph.constants import CHAIN, TREE, STAR, CYCLE, BICYCLE_LIKE
"""
import math

# skeleton categories
CHAIN        = 1<<0   # path
TREE         = 1<<1   # branching, acyclic
STAR         = 1<<2   # one hub
CYCLE        = 1<<3   # single loop
BICYCLE_LIKE = 1<<4   # two wheels and a frame

sCHAIN = 'chain'
sTREE = 'tree'
sSTAR = 'star'
sCYCLE = 'cycle'
sBICYCLE_LIKE = 'bicycle_like'

CATEGORIES = [CHAIN, TREE, STAR, CYCLE, BICYCLE_LIKE]

# minimal number of joints of each category
MIN_JOINTS = {
    CHAIN: 2,
    TREE: 3,
    STAR: 3,
    CYCLE: 3,
    BICYCLE_LIKE: 8
    }

# ablation switches (the keys of TrainConfig flags)
SPECTRAL_LOSS = 'spectral_loss'
HIERARCHICAL_ATTENTION = 'hierarchical_attention'
ADAPTIVE_COMPLEXITY = 'adaptive_complexity'
ADVERSARIAL = 'adversarial'

ABLATION_FLAGS = [SPECTRAL_LOSS, HIERARCHICAL_ATTENTION, ADAPTIVE_COMPLEXITY, ADVERSARIAL]

# the five rows of the ablation table: name -> flag switched off
ABLATIONS = [
    ('full', None),
    ('no_spectral', SPECTRAL_LOSS),
    ('no_attention', HIERARCHICAL_ATTENTION),
    ('no_adaptive', ADAPTIVE_COMPLEXITY),
    ('no_adversarial', ADVERSARIAL),
    ]

# numerical tolerances
SYMMETRY_TOL = 1e-9
DEGENERACY_TOL = 1e-8
PROB_EPS = 1e-7

# discretization of soft adjacencies
EDGE_THRESHOLD = 0.5

# diameter of the unit box, cost of an unmatched joint
UNIT_BOX_DIAMETER = math.sqrt(3)

# exact graph edit distance is used up to this number of nodes
GED_EXACT_LIMIT = 8

# assignments whose total cost is within this relative amount of the optimum
# are tied
TIE_TOLERANCE = 1e-9

# command line exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

def category_from_string(s):
    r"""
    EXAMPLES::

        >>> from skelgraph.constants import category_from_string, CHAIN, BICYCLE_LIKE

        >>> assert category_from_string('chain') == CHAIN
        >>> assert category_from_string('bicycle_like') == BICYCLE_LIKE

        >>> category_from_string('wheel')
        Traceback (most recent call last):
        ...
        ValueError: unknown category 'wheel'
    """
    if s == sCHAIN:
        return CHAIN
    elif s == sTREE:
        return TREE
    elif s == sSTAR:
        return STAR
    elif s == sCYCLE:
        return CYCLE
    elif s == sBICYCLE_LIKE:
        return BICYCLE_LIKE
    else:
        raise ValueError("unknown category '%s'" % s)

def category_to_string(cat):
    r"""
    EXAMPLES::

        >>> from skelgraph.constants import category_to_string, TREE, CYCLE

        >>> assert category_to_string(TREE) == 'tree'
        >>> assert category_to_string(CYCLE) == 'cycle'
    """
    if cat == CHAIN: return sCHAIN
    elif cat == TREE: return sTREE
    elif cat == STAR: return sSTAR
    elif cat == CYCLE: return sCYCLE
    elif cat == BICYCLE_LIKE: return sBICYCLE_LIKE
    else: raise ValueError("unknown category %s" % cat)

def categories_from_string(s):
    r"""
    Parse a comma separated list of categories.

    EXAMPLES::

        >>> from skelgraph.constants import categories_from_string, CHAIN, STAR
        >>> categories_from_string('chain,star') == [CHAIN, STAR]
        True
        >>> categories_from_string('all') == CATEGORIES
        True
    """
    s = s.strip()
    if s == 'all':
        return list(CATEGORIES)
    return [category_from_string(c.strip()) for c in s.split(',') if c.strip()]
