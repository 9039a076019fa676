"""
Command line interface of the denoiser.

 - ``acva denoise --mode gaussian --sigma 20 in.pgm out.pgm``
 - ``acva denoise --mode pg --alpha 400 in.pgm out.pgm``
 - ``acva denoise --mode raw raw.pgm out.pgm``
 - ``acva add-noise --mode gaussian --sigma 20 clean.pgm noisy.pgm``
 - ``acva simulate-raw --alpha 400 r.pgm g.pgm b.pgm raw.pgm``
 - ``acva evaluate clean.pgm out.pgm --peak 255``
 - ``acva gat-table --alpha 400 table.txt``

Exit codes: 0 on success, 1 on usage errors, 2 on run-time errors.
"""
import sys
import json
import logging
import argparse
import acva
import acva.constants as const
import acva.noise_model as NM
import acva.patching as PT
import acva.pipeline as PL
import acva.metrics as MT

logger = logging.getLogger(__name__)


class UsageError(Exception):
    """Raised on invalid command lines."""


class _parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


#-------------------------------------------------------------------------------
# PARSER
#-------------------------------------------------------------------------------
def _config_flags():
    flags = argparse.ArgumentParser(add_help = False)
    group = flags.add_argument_group('denoiser parameters')
    group.add_argument('--patch-size', type = int, default = const.PATCH_SIZE, help = 'patch side d [%(default)s]')
    group.add_argument('--window', type = int, default = const.WINDOW_SIZE, help = 'sliding window side [%(default)s]')
    group.add_argument('--step', type = int, default = const.WINDOW_STEP, help = 'sliding window step [%(default)s]')
    group.add_argument('--stride', type = int, default = const.PATCH_STRIDE, help = 'patch stride inside a window [%(default)s]')
    group.add_argument('--mu', type = float, default = const.MU, help = 'rank selection correction [%(default)s]')
    group.add_argument('--beta', type = float, default = const.BETA, help = 'suboptimal Wiener trade-off [%(default)s]')
    group.add_argument('--gamma-ici', type = float, default = const.GAMMA_ICI, help = 'ICI threshold [%(default)s]')
    group.add_argument('--lt', type = int, default = const.L_T, help = 'merging size gate [%(default)s]')
    group.add_argument('--rho', type = float, default = const.RHO_AMP, help = 'merging amplification coefficient [%(default)s]')
    group.add_argument('--epsilon', type = float, default = const.EPSILON, help = 'merge threshold tail probability [%(default)s]')
    group.add_argument('--min-cluster', type = int, default = const.MIN_CLUSTER_SIZE, help = 'smallest cluster kept after merging [%(default)s]')
    group.add_argument('--wiener-mode', choices = ('suboptimal', 'wiener'), default = 'suboptimal', help = 'shrinkage [%(default)s]')
    group.add_argument('--fixed-h', type = int, default = None, help = 'fixed local window half-width instead of LPA-ICI')
    group.add_argument('--threads', type = int, default = None, help = 'worker threads [number of CPUs]')
    group.add_argument('--dump-clusters', metavar = 'DIR', default = None, help = 'write per-window cluster label maps to DIR')
    return flags


def _noise_flags():
    flags = argparse.ArgumentParser(add_help = False)
    group = flags.add_argument_group('noise parameters')
    group.add_argument('--sigma', type = float, default = None, help = 'Gaussian noise standard deviation')
    group.add_argument('--alpha', type = float, default = None, help = 'Poisson-Gaussian gain')
    group.add_argument('--b', type = float, default = 0., help = 'Poisson-Gaussian Gaussian std [%(default)s]')
    group.add_argument('--p', type = float, default = 0., help = 'Poisson-Gaussian pedestal [%(default)s]')
    group.add_argument('--seed', type = int, default = 0, help = 'random seed [%(default)s]')
    return flags


def build_parser():
    """
    Parser of the ``acva`` command.

    :return: ``argparse.ArgumentParser``
    """
    common = argparse.ArgumentParser(add_help = False)
    common.add_argument('-v', '--verbose', action = 'store_true', help = 'debug messages')
    common.add_argument('-q', '--quiet', action = 'store_true', help = 'warnings and errors only')
    common.add_argument('--out', default = None, help = 'file for CSV/JSON results [standard output]')

    parser = _parser(prog = 'acva', description = 'Texture-preserving nonlocal PCA denoiser.')
    parser.add_argument('--version', action = 'version', version = acva.__version__)
    verbs  = parser.add_subparsers(dest = 'verb', parser_class = _parser)
    verbs.required = True
    noise, config = _noise_flags(), _config_flags()

    den = verbs.add_parser('denoise', parents = [common, noise, config], help = 'denoise an image')
    den.add_argument('--mode', choices = ('gaussian', 'pg', 'raw'), default = 'gaussian')
    den.add_argument('--flat-block', type = int, nargs = 4, default = (0, 0, 200, 200), metavar = ('ROW', 'COL', 'H', 'W'),
                     help = 'region for the raw noise estimation [0 0 200 200]')
    den.add_argument('input')
    den.add_argument('output')

    add = verbs.add_parser('add-noise', parents = [common, noise], help = 'synthesize noise')
    add.add_argument('--mode', choices = ('gaussian', 'pg'), default = 'gaussian')
    add.add_argument('input')
    add.add_argument('output')

    sim = verbs.add_parser('simulate-raw', parents = [common, noise], help = 'simulate a raw mosaic')
    sim.add_argument('--r-max', type = float, default = 1., help = 'raw scale [%(default)s]')
    sim.add_argument('--rgb', default = None, help = 'color image (replaces the three channel images)')
    sim.add_argument('--clean', default = None, help = 'also write the noise-free mosaic')
    sim.add_argument('paths', nargs = '+', metavar = 'PATH', help = 'R G B OUT, or OUT with --rgb')

    ev = verbs.add_parser('evaluate', parents = [common], help = 'PSNR and SSIM of an image')
    ev.add_argument('--peak', type = float, default = None, help = 'peak value [from the file]')
    ev.add_argument('--sigma', type = float, default = None, help = 'noise level reported in the CSV')
    ev.add_argument('clean')
    ev.add_argument('test')

    gat = verbs.add_parser('gat-table', parents = [common], help = 'tabulate the exact unbiased inverse')
    gat.add_argument('--alpha', type = float, default = None)
    gat.add_argument('--b', type = float, default = 0.)
    gat.add_argument('--p', type = float, default = 0.)
    gat.add_argument('--y-max', type = float, default = const.GAT_Y_MAX)
    gat.add_argument('--y-step', type = float, default = const.GAT_Y_STEP)
    gat.add_argument('--gaussian-aware', action = 'store_true')
    gat.add_argument('output')
    return parser


def _config(args):
    return PL.denoise_config(d = args.patch_size, window_size = args.window, window_step = args.step,
                             patch_stride = args.stride, mu = args.mu, beta = args.beta, gamma_ici = args.gamma_ici,
                             L_T = args.lt, rho_amp = args.rho, epsilon = args.epsilon, min_cluster_size = args.min_cluster, seed = args.seed,
                             thread_count = args.threads, wiener_mode = args.wiener_mode, fixed_h = args.fixed_h,
                             dump_clusters = args.dump_clusters)


def _params(args, required = True):
    if args.alpha is None:
        if required:
            raise UsageError("argument --alpha is required for Poisson-Gaussian noise")
        return None
    return NM.poisson_gaussian_params(args.alpha, args.b, args.p)


def _emit(args, text):
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, 'w') as f:
            f.write(text)


#-------------------------------------------------------------------------------
# VERBS
#-------------------------------------------------------------------------------
def _denoise(args):
    cfg    = _config(args)
    result = {'mode': args.mode}
    if args.mode == 'raw':
        mosaic = PL.read_raw_mosaic(args.input)
        params = _params(args, required = False) or mosaic.params
        out    = PL.denoise_raw_mosaic(mosaic, params, cfg, flat_block = args.flat_block)
        PL.write_raw_mosaic(args.output, out)
        result.update(alpha = out.params.alpha, b = out.params.b, p = out.params.p)
    else:
        img, peak = PT.read_image(args.input)
        if args.mode == 'gaussian':
            sigma = args.sigma
            if sigma is None:
                sigma = NM.estimate_sigma_mad(img)
                logger.info("Estimated sigma = %.4f", sigma)
            out = PL.denoise_gaussian(img, sigma, cfg)
            result['sigma'] = sigma
        else:
            params = _params(args)
            out    = PL.denoise_poisson_gaussian(img, params, cfg)
            result.update(alpha = params.alpha, b = params.b, p = params.p)
        PT.write_image(args.output, out, peak)
    _emit(args, json.dumps(result) + '\n')


def _add_noise(args):
    img, peak = PT.read_image(args.input)
    if args.mode == 'gaussian':
        if args.sigma is None:
            raise UsageError("argument --sigma is required for Gaussian noise")
        noisy = NM.synthesize_awgn(img, NM.gaussian_noise_spec(args.sigma, args.seed))
    else:
        noisy = NM.synthesize_poisson_gaussian(img, _params(args), seed = args.seed)
    PT.write_image(args.output, noisy, peak)


def _simulate_raw(args):
    params = _params(args)
    if args.rgb is not None:
        if len(args.paths) != 1:
            raise UsageError("with --rgb, a single output path is expected")
        rgb = PT.read_rgb_image(args.rgb)
    else:
        if len(args.paths) != 4:
            raise UsageError("expected R G B OUT paths, found %i" %len(args.paths))
        channels = [PT.read_image(path) for path in args.paths[:3]]
        rgb = [data/peak for data, peak in channels]
    noisy, clean = PL.simulate_raw(rgb, args.r_max, params, seed = args.seed)
    PL.write_raw_mosaic(args.paths[-1], noisy)
    if args.clean is not None:
        PL.write_raw_mosaic(args.clean, clean)


def _evaluate(args):
    clean, peak = PT.read_image(args.clean)
    test, _     = PT.read_image(args.test)
    peak        = peak if args.peak is None else args.peak
    report      = MT.metric_report.compare(clean, test, peak, image = args.test, sigma = args.sigma)
    if args.out is None:
        MT.write_csv([report], sys.stdout)
    else:
        with open(args.out, 'w') as f:
            MT.write_csv([report], f)


def _gat_table(args):
    table = NM.gat_table(_params(args), y_max = args.y_max, y_step = args.y_step, gaussian_aware = args.gaussian_aware)
    table.save(args.output)


VERBS = {'denoise':      _denoise,
         'add-noise':    _add_noise,
         'simulate-raw': _simulate_raw,
         'evaluate':     _evaluate,
         'gat-table':    _gat_table}


#-------------------------------------------------------------------------------
# ENTRY POINTS
#-------------------------------------------------------------------------------
def run(argv = None):
    """
    Parses the command line and runs the requested verb.

    :type argv: list of strings, default = None
    :param argv: Arguments without the program name. ``sys.argv[1:]`` if None.

    :return: exit code (0 success, 1 usage error, 2 run-time error)
    """
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        sys.stderr.write("acva: error: %s\n" %e)
        return 1
    except SystemExit as e:
        return 0 if e.code is None else int(e.code)

    level = logging.DEBUG if args.verbose else (logging.WARNING if args.quiet else logging.INFO)
    logging.basicConfig(level = level, stream = sys.stderr, format = '%(levelname)s %(name)s: %(message)s')
    logging.captureWarnings(True)
    try:
        VERBS[args.verb](args)
    except UsageError as e:
        sys.stderr.write("acva %s: error: %s\n" %(args.verb, e))
        return 1
    except AssertionError as e:
        sys.stderr.write("acva %s: invalid parameter: %s\n" %(args.verb, e))
        return 1
    except (ValueError, IndexError, OSError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        return 2
    return 0


def main():
    sys.exit(run())
