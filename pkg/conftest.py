# Doctests in skelgraph/ were written against NumPy < 2 scalar reprs
# (``False`` rather than ``np.False_``); keep that repr under NumPy >= 2.
import numpy

if int(numpy.__version__.split('.')[0]) >= 2:
    numpy.set_printoptions(legacy='1.25')
