r"""
Command line interface.

Usage::

    python -m skelgraph gen-data --categories all --count 200 --points 256 --noise 0.01 --seed 42 --out data.jsonl
    python -m skelgraph train --config run.cfg --data data.jsonl --out runs/full
    python -m skelgraph eval --checkpoint runs/full/best.npz --data data.jsonl --split test --report report.txt
    python -m skelgraph ablate --config run.cfg --data data.jsonl --out runs/ablation --seeds 41,42,43
    python -m skelgraph grad-check --trials 100

EXAMPLES::

    >>> from skelgraph.__main__ import exit_code
    >>> from skelgraph.errors import ConfigurationError, ParseError, NumericalError, DomainError
    >>> [exit_code(e('x')) for e in (ConfigurationError, ParseError, NumericalError, DomainError)]
    [1, 2, 3, 3]
"""
from __future__ import absolute_import, print_function

import argparse
import io
import logging
import sys

from .constants import EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL, categories_from_string
from .errors import (DimensionError, DomainError, IsolatedNodeError, ContractError, InvariantError,
        ParameterError, ConfigurationError, DataError)

logger = logging.getLogger('skelgraph')

def exit_code(error):
    r"""
    Exit code of the command line for the exception ``error``.
    """
    if isinstance(error, (ArithmeticError, DomainError, IsolatedNodeError)):
        return EXIT_NUMERICAL
    if isinstance(error, (DataError, InvariantError, IOError, OSError)):
        return EXIT_DATA
    if isinstance(error, (ConfigurationError, ParameterError, ContractError, DimensionError, ValueError)):
        return EXIT_USAGE
    raise error

def _seeds(s):
    return [int(x) for x in s.split(',') if x.strip()]

def _parser():
    parser = argparse.ArgumentParser(prog='skelgraph', description='Skeleton graph synthesis from point clouds')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='more output (repeat for debug)')
    parser.add_argument('-q', '--quiet', action='store_true', help='only report errors')
    sub = parser.add_subparsers(dest='command')

    p = sub.add_parser('gen-data', help='generate a synthetic dataset')
    p.add_argument('--categories', default='all', help="comma separated categories or 'all'")
    p.add_argument('--count', type=int, required=True)
    p.add_argument('--points', type=int, default=256)
    p.add_argument('--noise', type=float, default=0.01)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--min-joints', type=int, default=4)
    p.add_argument('--max-joints', type=int, default=12)
    p.add_argument('--out', required=True)

    p = sub.add_parser('train', help='train a model')
    p.add_argument('--config', help='key = value configuration file (defaults when omitted)')
    p.add_argument('--data', required=True)
    p.add_argument('--out', required=True)
    p.add_argument('--resume', help='checkpoint to continue from')
    p.add_argument('--progress', action='store_true', help='display a progress bar (needs tqdm)')

    p = sub.add_parser('eval', help='evaluate a checkpoint')
    p.add_argument('--checkpoint', required=True)
    p.add_argument('--data', required=True)
    p.add_argument('--split', default='test', choices=['train', 'val', 'test'])
    p.add_argument('--report', help='report file (printed when omitted)')

    p = sub.add_parser('ablate', help='run the ablation table')
    p.add_argument('--config')
    p.add_argument('--data', required=True)
    p.add_argument('--out', required=True)
    p.add_argument('--seeds', type=_seeds, help='comma separated seeds')

    p = sub.add_parser('grad-check', help='finite difference gradient suites')
    p.add_argument('--trials', type=int, default=100)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--suite', action='append', help='run only this suite (can repeat)')
    return parser

def _config(path):
    from .config import TrainConfig
    return TrainConfig() if path is None else TrainConfig.from_file(path)

def _gen_data(args):
    from .synthdata import generate_dataset, write_dataset
    records = generate_dataset(categories_from_string(args.categories), args.count, args.points, args.noise,
                               args.seed, args.min_joints, args.max_joints)
    write_dataset(records, args.out)
    logger.info('[gen-data] %d records written to %s', len(records), args.out)
    return EXIT_OK

def _train(args):
    from .harness import train
    checkpoint, history = train(_config(args.config), args.data, args.out, resume=args.resume,
                                verbosity=args.verbose - 1 if args.verbose else 0, progress=args.progress)
    logger.info('[train] %d epochs run, checkpoints in %s', len(history), args.out)
    return EXIT_OK

def _eval(args):
    from .harness import evaluate
    report = evaluate(args.checkpoint, args.data, args.split)
    text = report.to_text()
    if args.report:
        with io.open(args.report, 'w', encoding='utf-8') as f:
            f.write(u'%s' % text)
    else:
        print(text, end='')
    return EXIT_OK

def _ablate(args):
    from .harness import ablate, format_ablation_table
    rows = ablate(_config(args.config), args.data, args.out, args.seeds)
    print(format_ablation_table(rows))
    return EXIT_OK

def _grad_check(args):
    from .gradcheck import run_suites
    results = run_suites(args.trials, args.seed, args.suite)
    for r in results:
        print('%-12s %5d trials  max error %.3g  %s' % (r.name, r.trials, r.max_error, 'ok' if r.passed else 'FAILED'))
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL

COMMANDS = {
    'gen-data': _gen_data,
    'train': _train,
    'eval': _eval,
    'ablate': _ablate,
    'grad-check': _grad_check,
    }

def main(argv=None):
    r"""
    Run the command line ``argv`` and return the exit code.

    EXAMPLES::

        >>> from skelgraph.__main__ import main
        >>> main(['grad-check', '--trials', '1', '--suite', 'hessian'])
        1
    """
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if not e.code else EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    level = logging.ERROR if args.quiet else (logging.DEBUG if args.verbose > 1 else logging.INFO)
    logging.basicConfig(level=level, format='%(message)s')
    logger.setLevel(level)

    try:
        return COMMANDS[args.command](args)
    except (ValueError, ArithmeticError, IOError, OSError) as e:
        code = exit_code(e)
        logger.error('skelgraph %s: %s', args.command, e)
        return code

if __name__ == '__main__':
    sys.exit(main())
