r"""
Numerical environment.

All matrices of the package are dense ``float64`` numpy arrays and all
randomness goes through :func:`random_state`, a ``PCG64`` generator seeded by
an integer. The ``PCG64`` stream is specified independently of numpy, which
is what makes generated datasets reproducible across platforms.

TESTS::

    >>> from skelgraph.env import DTYPE, random_state, tqdm
    >>> DTYPE
    <class 'numpy.float64'>
    >>> float(random_state(3).random()) == float(random_state(3).random())
    True
"""
import numpy as np

# when True, data classes re-run their ``_check`` after every mutation
CHECK = False

DTYPE = np.float64

try:
    import tqdm
except ImportError:
    tqdm = None

error_msg = {
    'tqdm': 'the function {} can only display progress bars when the package tqdm is installed. See https://pypi.org/project/tqdm/ for instructions.',
    }

missing_mods = {
    'tqdm': tqdm is None,
    }

def require_package(mod_name, caller):
    if missing_mods[mod_name]:
        raise ValueError(error_msg[mod_name].format(caller))

def random_state(seed):
    r"""
    Return a ``PCG64`` generator seeded with the integer ``seed``.

    EXAMPLES::

        >>> from skelgraph.env import random_state
        >>> a = random_state(42).normal(size=3)
        >>> b = random_state(42).normal(size=3)
        >>> bool((a == b).all())
        True
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(int(seed)))

def as_matrix(x, copy=False):
    r"""
    Convert ``x`` to a 2-dimensional ``float64`` array (scalars become 1x1).

    EXAMPLES::

        >>> from skelgraph.env import as_matrix
        >>> as_matrix(3).shape
        (1, 1)
        >>> as_matrix([1, 2, 3]).shape
        (1, 3)
        >>> as_matrix([[1], [2]]).shape
        (2, 1)
    """
    a = np.array(x, dtype=DTYPE) if copy else np.asarray(x, dtype=DTYPE)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(1, -1)
    elif a.ndim != 2:
        raise ValueError('expected at most 2 dimensions, got shape %s' % (a.shape,))
    return a
