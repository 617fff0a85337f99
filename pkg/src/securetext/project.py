import functools
import logging

import click

from securetext.params import (
    ALICE,
    BOB,
    TAG_BITS,
    MODEL_KINDS,
    DISCLOSURE_POLICIES,
    TO_BOB,
    SEED_SIZE,
    SESSION_ID_SIZE,
    DEFAULT_HASH_P,
    DEFAULT_HASH_A,
    DEFAULT_HASH_B,
    DEFAULT_TOKEN_BITS,
    DEFAULT_PAD_TO,
    DEFAULT_SESSION_TIMEOUT,
    DEFAULT_FRACTION_BITS,
    DEFAULT_OVERFLOW_TARGET,
    DEFAULT_BUCKET_TRIALS,
    BUNDLED_CORPUS,
    BUNDLED_LR_MODEL,
    INVALID_SEED,
    INVALID_SESSION_ID,
    INVALID_ADDRESS,
    INVALID_BUCKETS,
    MISSING_BUNDLE,
    DEFAULT_VERBOSE_HELP,
    DEFAULT_TOKEN_BITS_HELP,
    DEFAULT_PAD_TO_HELP,
    DEFAULT_TIMEOUT_HELP,
    DEFAULT_BUCKETS_HELP,
    DEFAULT_DISCLOSURE_HELP,
    DEFAULT_RETRIES_HELP,
    DEFAULT_JOBS_HELP,
    DEFAULT_TARGET_HELP,
    DEFAULT_TRIALS_HELP,
)
from securetext.errors import SecureTextError, ProfileError
from securetext.utils import (
    ReportManager,
    bundled_path,
    load_config,
)


_CONFIG_DEFAULTS = {
    "hash_p":DEFAULT_HASH_P,
    "hash_a":DEFAULT_HASH_A,
    "hash_b":DEFAULT_HASH_B,
    "token_bits":DEFAULT_TOKEN_BITS,
    "pad_to":DEFAULT_PAD_TO,
    "session_timeout":DEFAULT_SESSION_TIMEOUT,
    "fraction_bits":DEFAULT_FRACTION_BITS,
}


def _is_valid_hex(value, size):
    try:
        return (len(bytes.fromhex(value)) == size)
    except ValueError:
        return False


def _is_valid_address(address):
    host, sep, port = address.rpartition(":")
    return bool(sep and host and port.isdigit())


def validate_seed(ctx, param, value):
    if (value is None):
        return None
    if not(_is_valid_hex(value, SEED_SIZE)):
        raise click.BadParameter(INVALID_SEED)
    return bytes.fromhex(value)


def validate_session_id(ctx, param, value):
    if (value is None):
        return None
    if not(_is_valid_hex(value, SESSION_ID_SIZE)):
        raise click.BadParameter(INVALID_SESSION_ID)
    return bytes.fromhex(value)


def validate_address(ctx, param, value):
    if ((value is not None) and not(_is_valid_address(value))):
        raise click.BadParameter(INVALID_ADDRESS)
    return value


def validate_buckets(ctx, param, value):
    if (value is None):
        return None
    from securetext.text.extraction import BucketLayout
    try:
        return BucketLayout.parse(value)
    except (ValueError, ProfileError):
        raise click.BadParameter(INVALID_BUCKETS)


def setting(ctx, key, value):
    """ Explicit flag, else the --config file, else the default in params. """
    if (value is not None):
        return value
    return ctx.obj["config"].get(key, _CONFIG_DEFAULTS[key])


def hash_params(ctx, token_bits, hash_p=None, hash_a=None, hash_b=None):
    from securetext.text.hashing import HashParams
    return HashParams(p=setting(ctx, "hash_p", hash_p),
                      a=setting(ctx, "hash_a", hash_a),
                      b=setting(ctx, "hash_b", hash_b),
                      l=setting(ctx, "token_bits", token_bits))


def read_model(ctx, path):
    from securetext.scoring.models import load_model
    return load_model(path, setting(ctx, "fraction_bits", None))


def read_text(path):
    with open(path, encoding="utf-8") as f:
        return f.read()


def session_class(ctx):
    if ctx.obj["verbose"]:
        from securetext.display.echo import EchoSession
        return EchoSession
    from securetext.pipeline.session import ClassificationSession
    return ClassificationSession


def reports_errors(function):
    """ Turn library failures into a one-line message and exit status 1. """
    @functools.wraps(function)
    def f(*args, **kwargs):
        try:
            return function(*args, **kwargs)
        except SecureTextError as e:
            raise click.ClickException(str(e))
        except OSError as e:
            raise click.ClickException("{}".format(e))
    return f


def hash_options(function):
    options = [
        click.option("--l", "--token-bits", "token_bits", type=int, default=None, help=DEFAULT_TOKEN_BITS_HELP),
        click.option("--hash-p", type=int, default=None, help="Prime modulus of the token hash."),
        click.option("--hash-a", type=int, default=None, help="Multiplier of the token hash."),
        click.option("--hash-b", type=int, default=None, help="Offset of the token hash."),
    ]
    for option in reversed(options):
        function = option(function)
    return function


def layout_options(function):
    options = [
        click.option("--buckets", callback=validate_buckets, default=None, help=DEFAULT_BUCKETS_HELP),
        click.option("--pad-to", type=int, default=None, help=DEFAULT_PAD_TO_HELP),
        click.option("--no-pad", is_flag=True, help="Do not pad Alice's token set with dummies."),
    ]
    for option in reversed(options):
        function = option(function)
    return function


@click.group()
@click.option("--verbose", "-v", is_flag=True, help=DEFAULT_VERBOSE_HELP)
@click.option("--config", type=click.Path(dir_okay=False), default=None,
              help="JSON file overriding hash, padding, timeout and fixed-point defaults.")
@click.pass_context
def main(ctx, verbose, config):
    """ Two-party private text classification. """
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        config = load_config(config)
    except SecureTextError as e:
        raise click.ClickException(str(e))
    ctx.obj = {"verbose":verbose, "config":config}


@main.command()
@click.option("--n", "n", type=int, required=True, help="Bob's lexicon size.")
@click.option("--m", "m", type=int, default=None,
              help="Alice's token-set size; defaults to the pad size.")
@click.option("--model", "--kind", "kind", type=click.Choice(MODEL_KINDS), required=True, help="Model kind.")
@click.option("--l", "--token-bits", "token_bits", type=int, default=None, help=DEFAULT_TOKEN_BITS_HELP)
@click.option("--buckets", callback=validate_buckets, default=None, help=DEFAULT_BUCKETS_HELP)
@click.option("--no-pad", is_flag=True,
              help="Size for an unpadded session (then --m is required). Padded and bucketed "
                   "sessions compare l+2 bits per id, unpadded ones l bits.")
@click.option("--seed", callback=validate_seed, default=None,
              help="Deterministic dealing from a 32-byte hex seed. Insecure; tests only.")
@click.option("--out-alice", type=click.Path(dir_okay=False), default="alice.bundle")
@click.option("--out-bob", type=click.Path(dir_okay=False), default="bob.bundle")
@click.option("--serve", "serve_address", callback=validate_address, default=None,
              help="Hand the bundles out over HOST:PORT instead of writing files.")
@click.pass_context
@reports_errors
def deal(ctx, n, m, kind, token_bits, buckets, no_pad, seed, out_alice, out_bob, serve_address):
    """
    Deal one session's correlated randomness for both parties.

    Sizes must match the session the bundles are used for. By default
    Alice pads her token set to --m with tagged dummies, which widens
    every compared id to l+2 bits; pass --no-pad to deal for plain l-bit
    comparisons of exactly --m tokens.
    """
    from securetext.dealer.demand import DemandProfile, count_demand
    from securetext.dealer.bundle import deal as deal_bundles, persist_bundle
    from securetext.display.text import display_demand
    if (no_pad and (buckets is None) and (m is None)):
        raise click.UsageError("--no-pad needs the exact token count in --m.")
    m = setting(ctx, "pad_to", None) if (m is None) else m
    pad = not(no_pad)
    tag_bits = TAG_BITS if (pad or (buckets is not None)) else 0
    profile = DemandProfile(n, m, setting(ctx, "token_bits", token_bits), kind, layout=buckets, tag_bits=tag_bits)
    display_demand(profile, count_demand(profile))
    alice, bob = deal_bundles(profile, seed=seed)
    if (serve_address is not None):
        from securetext.dealer.stream import serve_bundles
        click.echo("Serving bundles on {}.".format(serve_address))
        serve_bundles(serve_address, [alice, bob], timeout=setting(ctx, "session_timeout", None))
        click.echo("Both bundles delivered.")
    else:
        persist_bundle(alice, out_alice)
        persist_bundle(bob, out_bob)
        click.echo("Wrote {} and {}.".format(out_alice, out_bob))


def obtain_bundle(ctx, party, bundle, dealer):
    if ((bundle is None) == (dealer is None)):
        raise click.UsageError(MISSING_BUNDLE)
    if (dealer is not None):
        from securetext.dealer.stream import fetch_bundle
        return fetch_bundle(dealer, party, timeout=setting(ctx, "session_timeout", None))
    from securetext.dealer.bundle import load_bundle
    return load_bundle(bundle)


@main.group()
def alice():
    """ Commands run by the text holder. """


@alice.command("classify")
@click.option("--text-file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--connect", callback=validate_address, required=True, help="Bob's HOST:PORT.")
@click.option("--bundle", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--dealer", callback=validate_address, default=None, help="Fetch the bundle from HOST:PORT.")
@click.option("--n", "n", type=int, required=True, help="Bob's lexicon size.")
@click.option("--kind", type=click.Choice(MODEL_KINDS), required=True, help="Bob's model kind.")
@layout_options
@hash_options
@click.option("--disclosure", type=click.Choice(DISCLOSURE_POLICIES), default=TO_BOB, help=DEFAULT_DISCLOSURE_HELP)
@click.option("--session-id", callback=validate_session_id, default=None)
@click.option("--session-timeout", type=float, default=None, help=DEFAULT_TIMEOUT_HELP)
@click.option("--retries", type=int, default=0, help=DEFAULT_RETRIES_HELP)
@click.pass_context
@reports_errors
def alice_classify(ctx, text_file, connect, bundle, dealer, n, kind, buckets, pad_to, no_pad,
                   token_bits, hash_p, hash_a, hash_b, disclosure, session_id, session_timeout, retries):
    """
    Classify the text in TEXT_FILE with Bob's model without revealing it.
    """
    from securetext.pipeline.session import alice_job, classify
    from securetext.display.text import display_outcome
    job = alice_job(read_text(text_file),
                    obtain_bundle(ctx, ALICE, bundle, dealer),
                    n, kind,
                    params=hash_params(ctx, token_bits, hash_p, hash_a, hash_b),
                    layout=buckets,
                    pad_to=setting(ctx, "pad_to", pad_to),
                    pad=not(no_pad),
                    disclosure=disclosure,
                    session_id=session_id)
    outcome = classify(job, connect,
                       timeout=setting(ctx, "session_timeout", session_timeout),
                       retries=retries,
                       session_class=session_class(ctx))
    display_outcome(outcome)


@main.group()
def bob():
    """ Commands run by the model holder. """


@bob.command("serve")
@click.option("--model", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--listen", "listen_address", callback=validate_address, required=True)
@click.option("--bundle", "bundles", type=click.Path(exists=True, dir_okay=False), multiple=True,
              help="One bundle per session to serve.")
@click.option("--dealer", callback=validate_address, default=None, help="Fetch one bundle from HOST:PORT.")
@layout_options
@hash_options
@click.option("--disclosure", type=click.Choice(DISCLOSURE_POLICIES), default=TO_BOB, help=DEFAULT_DISCLOSURE_HELP)
@click.option("--session-id", callback=validate_session_id, default=None)
@click.option("--session-timeout", type=float, default=None, help=DEFAULT_TIMEOUT_HELP)
@click.pass_context
@reports_errors
def bob_serve(ctx, model, listen_address, bundles, dealer, buckets, pad_to, no_pad,
              token_bits, hash_p, hash_a, hash_b, disclosure, session_id, session_timeout):
    """
    Serve one classification session per bundle. Without padding,
    --pad-to must be Alice's exact token count.
    """
    from securetext.network.transport import listen
    from securetext.pipeline.session import bob_job, serve
    from securetext.display.text import display_outcome
    if (bool(bundles) == (dealer is not None)):
        raise click.UsageError(MISSING_BUNDLE)
    loaded = [obtain_bundle(ctx, BOB, path, None) for path in bundles] or [obtain_bundle(ctx, BOB, None, dealer)]
    scoring_model = read_model(ctx, model)
    params = hash_params(ctx, token_bits, hash_p, hash_a, hash_b)
    jobs = [bob_job(scoring_model, bundle,
                    m=setting(ctx, "pad_to", pad_to),
                    params=params,
                    layout=buckets,
                    pad=not(no_pad),
                    disclosure=disclosure,
                    session_id=session_id) for bundle in loaded]
    listener = listen(listen_address)
    click.echo("Serving {} session(s) on {}.".format(len(jobs), listen_address))
    try:
        outcomes = serve(jobs, listener, timeout=setting(ctx, "session_timeout", session_timeout),
                         session_class=session_class(ctx))
    finally:
        listener.close()
    failures = [outcome for outcome in outcomes if isinstance(outcome, Exception)]
    for outcome in outcomes:
        if not(isinstance(outcome, Exception)):
            display_outcome(outcome)
    if failures:
        raise click.ClickException("; ".join(str(e) for e in failures))


@main.group()
def oracle():
    """ Plaintext reference pipeline. """


@oracle.command("classify")
@click.option("--model", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--text-file", type=click.Path(exists=True, dir_okay=False), required=True)
@hash_options
@click.pass_context
@reports_errors
def oracle_classify(ctx, model, text_file, token_bits, hash_p, hash_a, hash_b):
    """
    Classify TEXT_FILE in the clear with the same fixed-point weights
    the secure pipeline uses.
    """
    from securetext.scoring.models import plaintext_classify
    scoring_model = read_model(ctx, model)
    params = hash_params(ctx, token_bits, hash_p, hash_a, hash_b)
    text = read_text(text_file)
    click.echo("class: {}".format(plaintext_classify(scoring_model, text, params, encoded=True)))
    exact = plaintext_classify(scoring_model, text, params, encoded=False)
    click.echo("class with exact weights: {}".format(exact))


@main.command()
@click.option("--jobs", "n_jobs", type=int, default=3, help=DEFAULT_JOBS_HELP)
@click.option("--model", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Model file. (Default: bundled toy logistic regression)")
@click.option("--text-file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Message to classify. (Default: first bundled corpus message)")
@click.option("--tcp", is_flag=True, help="Run over TCP loopback instead of in memory.")
@layout_options
@hash_options
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the CSV report here.")
@click.option("--save", is_flag=True, help="Save the CSV report in the user data directory.")
@click.pass_context
@reports_errors
def bench(ctx, n_jobs, model, text_file, tcp, buckets, pad_to, no_pad, token_bits, hash_p, hash_a, hash_b,
          out, save):
    """
    Time full classification sessions and report per-phase means as CSV.
    """
    from securetext.pipeline.batch import bench as run_bench, load_corpus
    from securetext.display.text import display_report
    from securetext.utils import to_text
    scoring_model = read_model(ctx, bundled_path(BUNDLED_LR_MODEL) if (model is None) else model)
    text = load_corpus(bundled_path(BUNDLED_CORPUS))[0][1] if (text_file is None) else read_text(text_file)
    _, report = run_bench(scoring_model, text, n_jobs,
                          tcp=tcp,
                          params=hash_params(ctx, token_bits, hash_p, hash_a, hash_b),
                          layout=buckets,
                          pad_to=setting(ctx, "pad_to", pad_to),
                          pad=not(no_pad),
                          timeout=setting(ctx, "session_timeout", None),
                          session_class=session_class(ctx))
    display_report(report)
    if (out is not None):
        to_text(report.to_csv(), out)
    if save:
        path = ReportManager().save(report)
        if (path is not None):
            click.echo("Saved {}.".format(path))


@main.command()
@click.option("--lexicon", type=click.Path(exists=True, dir_okay=False), required=True,
              help="One feature per line.")
@hash_options
@click.pass_context
@reports_errors
def collisions(ctx, lexicon, token_bits, hash_p, hash_a, hash_b):
    """
    List lexicon features that hash to the same token id.
    """
    from securetext.text.hashing import collision_report
    from securetext.display.text import display_collisions
    words = [line.strip() for line in read_text(lexicon).splitlines() if line.strip()]
    display_collisions(collision_report(words, hash_params(ctx, token_bits, hash_p, hash_a, hash_b)))


@main.command()
@click.option("--n", "n", type=int, required=True, help="Bob's lexicon size.")
@click.option("--m", "m", type=int, required=True, help="Alice's maximum token count.")
@click.option("--t", "t", type=int, required=True, help="Use 2^t buckets.")
@click.option("--target", type=float, default=DEFAULT_OVERFLOW_TARGET, help=DEFAULT_TARGET_HELP)
@click.option("--trials", type=int, default=DEFAULT_BUCKET_TRIALS, help=DEFAULT_TRIALS_HELP)
@click.option("--seed", type=int, default=0)
def buckets(n, m, t, target, trials, seed):
    """
    Suggest bucket capacities s1 (Bob) and s2 (Alice) by simulation.
    """
    from securetext.text.extraction import simulate_bucket_overflow, suggest_capacity
    from securetext.display.text import display_bucket_simulation
    if ((n < 1) or (m < 1) or (t < 0) or (trials < 1)):
        raise click.UsageError("--n, --m and --trials must be positive and --t non-negative.")
    suggested = list()
    for n_elements in (n, m):
        capacity = suggest_capacity(n_elements, t, target, trials, seed)
        start = max(1, -(-n_elements // (1 << t)))
        rows = [(s, simulate_bucket_overflow(n_elements, t, s, trials, seed)) for s in range(start, capacity + 1)]
        display_bucket_simulation(n_elements, t, rows)
        suggested.append(capacity)
    click.echo("--buckets {},{},{}".format(t, *suggested))


@main.command()
@click.option("--model", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Model file. (Default: bundled toy logistic regression)")
@click.option("--labelled", type=click.Path(exists=True, dir_okay=False), default=None,
              help="label<TAB>text lines. (Default: bundled synthetic corpus)")
@layout_options
@hash_options
@click.pass_context
@reports_errors
def accuracy(ctx, model, labelled, buckets, pad_to, no_pad, token_bits, hash_p, hash_a, hash_b):
    """
    Compare secure and plaintext accuracy on a labelled corpus.
    """
    from securetext.pipeline.batch import evaluate_accuracy, load_corpus
    from securetext.display.text import display_accuracy
    scoring_model = read_model(ctx, bundled_path(BUNDLED_LR_MODEL) if (model is None) else model)
    corpus = load_corpus(bundled_path(BUNDLED_CORPUS) if (labelled is None) else labelled)
    report = evaluate_accuracy(scoring_model, corpus,
                               params=hash_params(ctx, token_bits, hash_p, hash_a, hash_b),
                               layout=buckets,
                               pad_to=setting(ctx, "pad_to", pad_to),
                               pad=not(no_pad),
                               session_class=session_class(ctx))
    display_accuracy(report)
    if (report.agreement < 1.0):
        raise click.ClickException("secure and plaintext labels disagree")
