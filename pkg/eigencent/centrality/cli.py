# Copyright 2026 The eigencent Authors | http://www.eclipse.org/legal/epl-v20.html
"""Command line: train, eval, gradcheck, bench-converge and export-graph."""
import argparse
from dataclasses import asdict, dataclass
import json
import logging
import os
import warnings

import numpy as np

from . import constants
from .eigencentrality import PowerConfig, converge_stats, power_method
from .errors import CheckpointError, ConfigError, ContractError, DivergenceError
from .model import AGGREGATORS, PAD_ID, TASKS
from .numerics import column_softmax, finite_diff_grad, make_rng, relative_error
from .powergrad import analytic_grad_a, decay_fit, grad_wrt_init_z, unrolled_grad_a
from .train import (
    Checkpoint, TrainConfig, evaluate, load_corpus, make_synthetic_task, model_from_checkpoint,
    prepare_model, train_loop
)

logger = logging.getLogger(__name__)

DIR = os.path.join(os.path.dirname(os.path.realpath(__file__)), '..')
DEFAULT_CONFIG = os.path.join(DIR, 'static', 'config.json')

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3

FD_THRESHOLD = 1e-5
AGREEMENT_THRESHOLD = 1e-8
INIT_GRAD_THRESHOLD = 1e-8
# instances closer to a repeated dominant eigenvalue are too ill-conditioned for differencing
MAX_FD_RATIO = 0.95
MAX_DECAY_RATIO = 0.9
DECAY_STEPS = 200
_REFERENCE_POWER = PowerConfig(epsilon=1e-13, max_converge_steps=10000)


def load_config(args):
    cfg = TrainConfig.from_json(args.config) if args.config else TrainConfig.from_json(
        DEFAULT_CONFIG)
    overrides = dict(constants.HYPER_PARAMS[args.preset]) if args.preset else {}
    for key in ['seed', 'aggregator', 'task']:
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    if not overrides:
        return cfg
    return TrainConfig.from_dict(dict(cfg.to_dict(), **overrides))


def synthetic_dataset(seed):
    task = constants.SYNTHETIC_TASK
    return make_synthetic_task(seed, n_classes=task['n_classes'], vocab=task['vocab'],
                               distractor_rate=task['distractor_rate'],
                               length=(task['min_length'], task['max_length']),
                               n_examples=task['n_examples'])


def write_json(path, obj):
    with open(path, 'w') as f:
        json.dump(obj, f, indent=2)
        f.write('\n')


def cmd_train(args):
    cfg = load_config(args)
    dev = None
    if cfg.task == 'synthetic':
        dataset = synthetic_dataset(cfg.seed)
    else:
        if not args.train:
            raise ConfigError('--train CORPUS is required for task {}'.format(cfg.task))
        dataset = load_corpus(args.train, cfg.task, min_count=cfg.vocab_min_count)
        if args.dev:
            dev = load_corpus(args.dev, cfg.task, vocab=dataset.vocab,
                              n_classes=dataset.n_classes)
    resume = Checkpoint.load(args.resume) if args.resume else None
    model = prepare_model(cfg, dataset.vocab, dataset.n_classes)
    os.makedirs(args.out, exist_ok=True)
    write_json(os.path.join(args.out, 'config.json'), cfg.to_dict())
    result = train_loop(dataset, model, cfg, dev=dev, out_dir=args.out, resume=resume)
    if result.log:
        final = result.log[-1]
        print('epoch {epoch}: train loss {train_loss:.4f}, dev acc {dev_acc:.4f}'.format(**final))
    print('best dev accuracy {} at epoch {}, checkpoints in {}'.format(
        result.best.meta.get('best_dev_acc'), result.best.epoch, args.out))
    return EXIT_OK


def cmd_eval(args):
    ckpt = Checkpoint.load(args.checkpoint)
    model, vocab, cfg = model_from_checkpoint(ckpt)
    if args.corpus:
        dataset = load_corpus(args.corpus, cfg.task, vocab=vocab, n_classes=model.n_classes)
    elif cfg.task == 'synthetic':
        _, dataset = synthetic_dataset(cfg.seed).split(cfg.dev_fraction, cfg.seed)
    else:
        raise ConfigError('--corpus is required for task {}'.format(cfg.task))
    report = evaluate(dataset, model).to_dict()
    print(json.dumps(report))
    if args.out:
        write_json(args.out, report)
    return EXIT_OK


def dense_perron(a):
    vals, vecs = np.linalg.eig(a)
    v = np.abs(vecs[:, np.argmax(vals.real)].real)
    return v / np.linalg.norm(v)


def second_ratio(a):
    mags = np.sort(np.abs(np.linalg.eigvals(a)))[::-1]
    return mags[1] / mags[0]


def random_instance(rng, n_max, max_ratio):
    """Random positive column stochastic matrix and cotangent, n in [2, n_max]."""
    while True:
        n = int(rng.integers(2, n_max + 1))
        a = column_softmax(rng.normal(size=(n, n)))
        if second_ratio(a) <= max_ratio:
            return a, rng.normal(size=n)


def gradcheck(n_max, trials, seed, decay_curves=None):
    """Run the three gradient checks; returns the report dict.

    decay_curves, when given, is a list that receives one dL/dz decay curve per instance.
    """
    rng = make_rng(seed)
    fd_error = agreement = init_grad = 0.0
    ratios = []
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        for _ in range(trials):
            a, gamma = random_instance(rng, n_max, MAX_FD_RATIO)
            got = analytic_grad_a(a, power_method(a, _REFERENCE_POWER), gamma, trunc_k=500)
            expected = finite_diff_grad(lambda m: float(gamma @ dense_perron(m)), a.copy())
            fd_error = max(fd_error, relative_error(got, expected))

            eig = power_method(a)
            series = analytic_grad_a(a, eig, gamma, trunc_k=20, tol=0)
            unrolled = unrolled_grad_a(a, PowerConfig(grad_steps=20), gamma, eig).grad
            agreement = max(agreement, float(np.max(np.abs(series - unrolled))))

            a, gamma = random_instance(rng, n_max, MAX_DECAY_RATIO)
            grad_z, decay = grad_wrt_init_z(a, PowerConfig(), gamma, n_steps=DECAY_STEPS)
            init_grad = max(init_grad, float(np.linalg.norm(grad_z)))
            fitted, r2 = decay_fit(decay)
            ratios.append({'fitted': fitted, 'expected': float(second_ratio(a)), 'r2': r2})
            if decay_curves is not None:
                decay_curves.append(decay)
    checks = {
        'analytic_vs_finite_diff': {'max_error': fd_error, 'threshold': FD_THRESHOLD},
        'analytic_vs_unrolled': {'max_error': agreement, 'threshold': AGREEMENT_THRESHOLD},
        'init_grad_norm': {'max_error': init_grad, 'threshold': INIT_GRAD_THRESHOLD},
    }
    for check in checks.values():
        check['passed'] = bool(check['max_error'] <= check['threshold'])
    return {
        'seed': seed,
        'n_max': n_max,
        'trials': trials,
        'checks': checks,
        'decay_ratios': ratios,
        'passed': all(c['passed'] for c in checks.values()),
    }


def cmd_gradcheck(args):
    curves = [] if args.decay_curves else None
    report = gradcheck(args.n, args.trials, args.seed, curves)
    if curves is not None:
        for instance, curve in enumerate(curves):
            for step, norm in enumerate(curve):
                print(json.dumps({'instance': instance, 'step': step, 'norm': float(norm)}))
    for name, check in report['checks'].items():
        logger.info('%-24s max error %.3e (threshold %.0e) %s', name, check['max_error'],
                    check['threshold'], 'ok' if check['passed'] else 'FAILED')
    print(json.dumps({'summary': report['checks'], 'passed': report['passed']}))
    if args.out:
        write_json(args.out, report)
    return EXIT_OK if report['passed'] else EXIT_CHECK_FAILED


def token_sequences(dataset):
    for example in dataset.examples:
        if dataset.task == 'document':
            yield from example
        elif dataset.task == 'pair':
            yield from example
        else:
            yield example


def checkpoint_adjacencies(args):
    ckpt = Checkpoint.load(args.checkpoint)
    model, vocab, cfg = model_from_checkpoint(ckpt)
    if args.corpus:
        dataset = load_corpus(args.corpus, cfg.task, vocab=vocab, n_classes=model.n_classes)
    elif cfg.task == 'synthetic':
        dataset = synthetic_dataset(cfg.seed)
    else:
        raise ConfigError('--corpus is required for task {}'.format(cfg.task))
    matrices = []
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        for ids in token_sequences(dataset):
            if np.any(np.asarray(ids) != PAD_ID):
                matrices.append(model.sentence.graph(ids)[1])
    return matrices, cfg.power


def cmd_bench_converge(args):
    if args.checkpoint:
        matrices, cfg = checkpoint_adjacencies(args)
    else:
        rng = make_rng(args.seed)
        matrices = [column_softmax(rng.normal(size=(n, n)))
                    for n in rng.integers(2, args.n_max + 1, size=args.batch)]
        cfg = PowerConfig()
    histogram = converge_stats(matrices, cfg)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, 'converge_histogram.json')
    write_json(path, histogram.to_dict())
    print('{} sequences: median {} steps, p95 {} steps, {:.2%} unconverged at {}'.format(
        histogram.total, histogram.median, histogram.p95, histogram.unconverged_fraction,
        histogram.max_converge_steps))
    print('histogram written to {}'.format(path))
    return EXIT_OK


@dataclass
class GraphExport:
    tokens: list
    weights: list
    adjacency: list
    meta: dict

    def __post_init__(self):
        n = len(self.tokens)
        assert len(self.weights) == n and len(self.adjacency) == n, \
            'graph of {} tokens has {} weights'.format(n, len(self.weights))


def export_graph(model, vocab, sentence):
    tokens = sentence.split()
    ids = vocab.encode(tokens)
    # a literal pad token is dropped by the encoder
    tokens = [t for t, i in zip(tokens, ids) if i != PAD_ID]
    _, a, w = model.sentence.graph(ids)
    return GraphExport(tokens, w.weights.tolist(), a.tolist(), {
        'lambda': w.eig.eigenvalue,
        'steps_taken': w.eig.steps_taken,
        'converged': w.eig.converged,
    })


def cmd_export_graph(args):
    model, vocab, _ = model_from_checkpoint(Checkpoint.load(args.checkpoint))
    export = asdict(export_graph(model, vocab, args.sentence))
    if args.out:
        write_json(args.out, export)
        print('graph of {} tokens written to {}'.format(len(export['tokens']), args.out))
    else:
        print(json.dumps(export))
    return EXIT_OK


def main(args):
    try:
        return args.func(args)
    except DivergenceError as e:
        print('training diverged: {}'.format(e))
        return EXIT_DIVERGED
    except (ConfigError, ContractError, CheckpointError, OSError) as e:
        print('error: {}'.format(e))
        return EXIT_USAGE


def build_parser():
    parser = argparse.ArgumentParser(
        prog='eigencent', description='Eigen-centrality attention for text classification.')
    parser.add_argument('--verbose', action='store_true', default=False,
                        help='Log per-batch progress.')
    commands = parser.add_subparsers(dest='command', required=True)

    def config_flags(p):
        p.add_argument('--config', default='',
                       help='JSON config file. The default is the bundled synthetic config.')
        p.add_argument('--preset', choices=sorted(constants.HYPER_PARAMS),
                       help='Apply a named hyper-parameter preset on top of the config.')
        p.add_argument('--seed', type=int, help='Override the config seed.')
        p.add_argument('--aggregator', choices=AGGREGATORS, help='Aggregation strategy.')
        p.add_argument('--task', choices=TASKS, help='Model family and data format.')

    p = commands.add_parser('train', help='Train a model and write checkpoints.')
    config_flags(p)
    p.add_argument('--train', help='Training corpus (TSV). Not needed for the synthetic task.')
    p.add_argument('--dev', help='Dev corpus; by default a seeded split of --train.')
    p.add_argument('--resume', help='Continue from a last.ckpt written by an earlier run.')
    p.add_argument('--out', default='runs', help='Directory for logs and checkpoints.')
    p.set_defaults(func=cmd_train)

    p = commands.add_parser('eval', help='Evaluate a checkpoint.')
    p.add_argument('--checkpoint', required=True)
    p.add_argument('--corpus', help='Corpus to score. Synthetic models use their dev split.')
    p.add_argument('--out', help='Also write the report to this JSON file.')
    p.set_defaults(func=cmd_eval)

    p = commands.add_parser('gradcheck', help='Check analytic gradients on random graphs.')
    p.add_argument('--n', type=int, default=8, help='Largest graph size.')
    p.add_argument('--trials', type=int, default=100)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--decay-curves', dest='decay_curves', action='store_true', default=False,
                   help='Print the per-step dL/dz decay norms as JSON lines.')
    p.add_argument('--out', help='Also write the full report to this JSON file.')
    p.set_defaults(func=cmd_gradcheck)

    p = commands.add_parser('bench-converge', help='Histogram of power method step counts.')
    p.add_argument('--checkpoint', help='Use the word graphs of a trained model.')
    p.add_argument('--corpus', help='Corpus for --checkpoint; synthetic models regenerate theirs.')
    p.add_argument('--batch', type=int, default=1000, help='Random matrices without --checkpoint.')
    p.add_argument('--n-max', dest='n_max', type=int, default=64)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out', default='.', help='Directory for converge_histogram.json.')
    p.set_defaults(func=cmd_bench_converge)

    p = commands.add_parser('export-graph', help='Export the word graph of one sentence.')
    p.add_argument('--checkpoint', required=True)
    p.add_argument('--sentence', required=True, help='Whitespace tokenized text.')
    p.add_argument('--out', help='Output JSON file; stdout by default.')
    p.set_defaults(func=cmd_export_graph)
    return parser


def run(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(asctime)s %(name)s %(levelname)s %(message)s')
    return main(args)


if __name__ == '__main__':
    raise SystemExit(run())
