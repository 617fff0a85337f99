import json

import pytest
from click.testing import CliRunner

from securetext.params import (
    ALICE,
    BOB,
    LR,
    TAG_BITS,
    DEFAULT_TOKEN_BITS,
    DEFAULT_PAD_TO,
    BENCH_CSV_HEADER,
    BUNDLED_LR_MODEL,
)
from securetext.errors import ConfigError
from securetext.dealer.demand import DemandProfile, count_demand
from securetext.dealer.bundle import load_bundle
from securetext.project import main
from securetext.utils import bundled_path, load_config


SEED = "ab" * 32

LR_MODEL = bundled_path(BUNDLED_LR_MODEL)


def get_runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, [str(arg) for arg in args])


def _width():
    return DEFAULT_TOKEN_BITS + TAG_BITS


def test_deal_writes_both_bundles():
    runner = get_runner()
    with runner.isolated_filesystem():
        result = invoke(runner, "deal", "--n", 14, "--kind", LR, "--seed", SEED)
        assert result.exit_code == 0, result.output
        alice, bob = load_bundle("alice.bundle"), load_bundle("bob.bundle")
        assert (alice.party, bob.party) == (ALICE, BOB)
        demand = count_demand(DemandProfile(14, DEFAULT_PAD_TO, DEFAULT_TOKEN_BITS, LR, tag_bits=TAG_BITS))
        assert alice.sizes()["z2_triples"] == demand.z2_triples
        assert bob.sizes()["z2_masks"] == demand.bob_z2_masks


def test_seeded_deal_is_reproducible():
    runner = get_runner()
    with runner.isolated_filesystem():
        for name in ("first", "second"):
            invoke(runner, "deal", "--n", 3, "--kind", "ada", "--seed", SEED,
                   "--out-alice", name + ".a", "--out-bob", name + ".b")
        assert load_bundle("first.a") == load_bundle("second.a")


def test_deal_accepts_documented_flags():
    """ --l and --model name the same settings as --token-bits and --kind. """
    runner = get_runner()
    with runner.isolated_filesystem():
        result = invoke(runner, "deal", "--n", 2, "--m", 3, "--l", 13, "--model", LR, "--no-pad", "--seed", SEED,
                        "--out-alice", "plain.a", "--out-bob", "plain.b")
        assert result.exit_code == 0, result.output
        assert load_bundle("plain.a").sizes()["z2_masks"] == 3 * 13
        demand = count_demand(DemandProfile(2, 3, 13, LR, tag_bits=0))
        assert load_bundle("plain.b").sizes()["z2_triples"] == demand.z2_triples
        invoke(runner, "deal", "--n", 2, "--m", 3, "--token-bits", 13, "--kind", LR, "--no-pad", "--seed", SEED,
               "--out-alice", "alias.a", "--out-bob", "alias.b")
        assert load_bundle("alias.a") == load_bundle("plain.a")
        invoke(runner, "deal", "--n", 2, "--m", 3, "--l", 13, "--model", LR, "--out-alice", "padded.a")
        assert load_bundle("padded.a").sizes()["z2_masks"] == 3 * (13 + TAG_BITS)


def test_config_and_flag_precedence():
    """ --m beats the config file, which beats the built-in pad size. """
    runner = get_runner()
    with runner.isolated_filesystem():
        with open("config.json", "w") as f:
            json.dump({"pad_to":8}, f)
        invoke(runner, "--config", "config.json", "deal", "--n", 2, "--kind", LR)
        assert load_bundle("alice.bundle").sizes()["z2_masks"] == 8 * _width()
        invoke(runner, "--config", "config.json", "deal", "--n", 2, "--kind", LR, "--m", 5)
        assert load_bundle("alice.bundle").sizes()["z2_masks"] == 5 * _width()


def test_unknown_config_key():
    runner = get_runner()
    with runner.isolated_filesystem():
        with open("config.json", "w") as f:
            json.dump({"colour":1}, f)
        result = invoke(runner, "--config", "config.json", "deal", "--n", 2, "--kind", LR)
        assert result.exit_code == 1
        assert "unknown keys colour" in result.output


def test_load_config_rejects_non_numbers(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"pad_to":"many"}))
    with pytest.raises(ConfigError):
        load_config(path)


def test_invalid_arguments():
    runner = get_runner()
    assert invoke(runner, "deal", "--n", 2, "--kind", LR, "--seed", "zz").exit_code == 2
    assert invoke(runner, "deal", "--n", 2, "--kind", "svm").exit_code == 2
    assert invoke(runner, "deal", "--n", 2, "--kind", LR, "--buckets", "1,0,2").exit_code == 2
    assert invoke(runner, "deal", "--n", 2, "--kind", LR, "--no-pad").exit_code == 2
    assert invoke(runner, "deal", "--n", 2, "--kind", LR, "--serve", "nowhere").exit_code == 2


def test_invalid_profile_is_reported():
    result = invoke(get_runner(), "deal", "--n", 0, "--kind", LR)
    assert result.exit_code == 1
    assert "Error" in result.output


def test_bob_needs_a_bundle():
    runner = get_runner()
    result = invoke(runner, "bob", "serve", "--model", LR_MODEL, "--listen", "127.0.0.1:0")
    assert result.exit_code == 2


def test_oracle_classify():
    runner = get_runner()
    with runner.isolated_filesystem():
        with open("message.txt", "w") as f:
            f.write("what a terrible boring day")
        result = invoke(runner, "oracle", "classify", "--model", LR_MODEL, "--text-file", "message.txt")
        assert result.exit_code == 0, result.output
        assert "class: 0" in result.output


def test_collisions():
    runner = get_runner()
    with runner.isolated_filesystem():
        with open("lexicon.txt", "w") as f:
            f.write("good\ngreat\nlove\nnot good\n")
        assert "No collisions." in invoke(runner, "collisions", "--lexicon", "lexicon.txt").output
        result = invoke(runner, "collisions", "--lexicon", "lexicon.txt", "--token-bits", 1)
        assert result.exit_code == 0
        assert "No collisions." not in result.output


def test_buckets():
    """ A single bucket must hold every element. """
    result = invoke(get_runner(), "buckets", "--n", 4, "--m", 6, "--t", 0, "--trials", 10)
    assert result.exit_code == 0, result.output
    assert result.output.splitlines()[-1] == "--buckets 0,4,6"


def test_bench_writes_report():
    runner = get_runner()
    with runner.isolated_filesystem():
        result = invoke(runner, "bench", "--jobs", 1, "--pad-to", 16, "--out", "report.csv")
        assert result.exit_code == 0, result.output
        with open("report.csv") as f:
            assert f.readline().strip() == ",".join(BENCH_CSV_HEADER)


def test_accuracy():
    result = invoke(get_runner(), "accuracy", "--pad-to", 24)
    assert result.exit_code == 0, result.output
    assert "agreement" in result.output
    assert "0 failed sessions" in result.output
