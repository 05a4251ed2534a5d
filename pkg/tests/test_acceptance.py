"""Release acceptance checklist, one test per criterion.

Each test prints its measured numbers before asserting, so a failed run
shows how far off it landed and `pytest -v` reads as a pass/fail list.
The synthetic end-to-end checks share one module-scoped corpus.
"""

import random
import time
from importlib.resources import files

import pytest

from gmlsa.cli import main
from gmlsa.corpus import NEGATIVE, POSITIVE, load_corpus
from gmlsa.easy import REASON_CONFLICT, REASON_LONG_NEGATION
from gmlsa.engine import EngineConfig, METHOD_EASY, bench_scaling, evaluate, run
from gmlsa.evidence import FRAME_SUPPORT, Mass, combine, vacuous
from gmlsa.features import OPPOSITE, SIMILAR, FeatureIndex
from gmlsa.inference import (
    InferenceConfig,
    compile_subgraph,
    exact_marginal,
    infer_marginal,
)
from gmlsa.lexicon import load_lexicon
from gmlsa.synth import generate_synthetic, synthetic_lexicon
from tests.conftest import (
    EASY_EXAMPLE,
    HARD_CONFLICT_EXAMPLE,
    HARD_NEGATION_EXAMPLE,
    RUNNING_CORPUS,
)
from tests.test_easy import classify
from tests.test_evidence import as_dict, oracle_combine, random_mass
from tests.test_features import _prepare_relations
from tests.test_inference import build_graph, random_case

RESOURCES = files("gmlsa") / "resources"

LOGISTIC_AT_2 = 0.8807970779778823


@pytest.fixture(scope="module")
def synthetic_corpus():
    return generate_synthetic(2000, easy_fraction=0.5, noise=0.05, seed=7)


@pytest.fixture(scope="module")
def synthetic_words():
    return synthetic_lexicon()


@pytest.fixture(scope="module")
def sample_paths():
    return str(RESOURCES / "sample_corpus.json"), str(RESOURCES / "sample_lexicon.tsv")


def test_criterion_1_sampler_matches_enumeration():
    # 120 seeded subgraphs, up to 12 unlabeled variables, weights in [-3, 3]
    t0 = time.perf_counter()
    diffs = []
    for seed in range(120):
        sub, index = random_case(seed, n_high=12)
        assert len(sub.unlabeled_ids) <= 12
        comp = compile_subgraph(sub, dict(index.kind_weights))
        got = infer_marginal(comp, InferenceConfig(seed=seed)).probability
        diffs.append(abs(got - exact_marginal(sub)))
    elapsed = time.perf_counter() - t0
    within = sum(d <= 0.02 for d in diffs)
    print(f"criterion 1: {within}/{len(diffs)} within 0.02, max diff "
          f"{max(diffs):.4f}, {elapsed:.1f}s")
    assert within >= 0.95 * len(diffs)
    assert elapsed < 60.0


def test_criterion_2_closed_form_anchor():
    index = FeatureIndex()
    index.add_word(0, (("good",), False)).weight = 2.0
    sub = build_graph(1, index, {}).extract_subgraph(0)
    exact = exact_marginal(sub)
    comp = compile_subgraph(sub, dict(index.kind_weights))
    sampled = infer_marginal(comp, InferenceConfig(seed=5)).probability
    print(f"criterion 2: exact {exact:.16f}, sampled {sampled:.4f}")
    assert abs(exact - LOGISTIC_AT_2) <= 1e-12
    assert abs(sampled - LOGISTIC_AT_2) <= 0.02


def test_criterion_3_mass_algebra():
    rng = random.Random(20260821)
    worst_pair = worst_norm = worst_assoc = 0.0
    for _ in range(1000):
        m1, m2 = random_mass(rng), random_mass(rng)
        got = combine(m1, m2)
        want, k = oracle_combine(as_dict(m1), as_dict(m2))
        for ours, oracle in zip((got.m_a, got.m_b, got.m_both), want.values()):
            worst_pair = max(worst_pair, abs(ours - oracle))
        worst_norm = max(worst_norm, abs(got.m_a + got.m_b + got.m_both - 1.0))
        assert got.conflict == pytest.approx(k, abs=1e-12)

        ident = combine(m1, vacuous(m1.frame))
        assert (ident.m_a, ident.m_b, ident.m_both) == (m1.m_a, m1.m_b, m1.m_both)

        m3 = random_mass(rng)
        left = combine(combine(m1, m2), m3)
        right = combine(m1, combine(m2, m3))
        worst_assoc = max(
            worst_assoc,
            abs(left.m_a - right.m_a),
            abs(left.m_b - right.m_b),
            abs(left.m_both - right.m_both),
        )
    print(f"criterion 3: worst pair err {worst_pair:.2e}, norm err "
          f"{worst_norm:.2e}, assoc err {worst_assoc:.2e}")
    assert worst_pair <= 1e-9
    assert worst_norm <= 1e-9
    assert worst_assoc <= 1e-9

    m1 = Mass(FRAME_SUPPORT, 0.54, 0.06, 0.40)
    m2 = Mass(FRAME_SUPPORT, 0.81, 0.09, 0.10)
    out = combine(m1, m2)
    oracle, k = oracle_combine(as_dict(m1), as_dict(m2))
    print(f"criterion 3 worked example: K {out.conflict:.4f}, combined "
          f"({out.m_a:.4f}, {out.m_b:.4f}, {out.m_both:.4f})")
    assert out.conflict == pytest.approx(0.0972, abs=1e-12)
    assert out.m_a == pytest.approx(0.9032, abs=1e-3)
    assert out.m_b == pytest.approx(0.0525, abs=1e-3)
    assert out.m_both == pytest.approx(0.0443, abs=1e-3)
    for ours, want in zip((out.m_a, out.m_b, out.m_both), oracle.values()):
        assert ours == pytest.approx(want, abs=1e-9)


def test_criterion_4_running_example(connectives, lexicon):
    index, created = _prepare_relations(RUNNING_CORPUS, connectives, lexicon)
    got = {rel.units: rel.kind for rel in created}
    print(f"criterion 4: relations {got}")
    assert got == {(0, 1): OPPOSITE, (2, 3): SIMILAR}

    easy = classify(EASY_EXAMPLE, lexicon, connectives)
    negation = classify(HARD_NEGATION_EXAMPLE, lexicon, connectives)
    conflict = classify(HARD_CONFLICT_EXAMPLE, lexicon, connectives)
    print(f"criterion 4: easy={easy.easy}/{easy.polarity} "
          f"negation reasons={set(negation.reasons)} "
          f"conflict reasons={set(conflict.reasons)}")
    assert easy.easy and easy.polarity == NEGATIVE
    assert not negation.easy and negation.reasons == {REASON_LONG_NEGATION}
    assert not conflict.easy and conflict.reasons == {REASON_CONFLICT}


def test_criterion_5_one_label_per_iteration(sample_paths):
    corpus_path, lexicon_path = sample_paths
    checked = []
    for corpus, lexicon in (
        (load_corpus(corpus_path), load_lexicon(lexicon_path)),
        (generate_synthetic(80, easy_fraction=0.5, noise=0.1, seed=3),
         synthetic_lexicon()),
    ):
        result = run(corpus, lexicon)
        records = result.records
        hard = [r for r in records if r.method != METHOD_EASY]
        # every unit labeled exactly once, one hard label per iteration,
        # iteration numbers dense from 1
        assert sorted(r.unit_id for r in records) == list(range(len(records)))
        assert result.iterations == len(hard)
        assert sorted(r.iteration for r in hard) == list(range(1, len(hard) + 1))
        assert all(r.iteration is None for r in records if r.method == METHOD_EASY)

        single = run(corpus, lexicon, config=EngineConfig(k=1))
        assert single.iterations == result.iterations
        checked.append((len(records), result.iterations))
    print(f"criterion 5: (units, iterations) per corpus {checked}")


def test_criterion_6_synthetic_end_to_end(synthetic_corpus, synthetic_words):
    t0 = time.perf_counter()
    result = run(synthetic_corpus, synthetic_words)
    elapsed = time.perf_counter() - t0
    report = evaluate(result, synthetic_corpus)
    print(f"criterion 6: accuracy {report['accuracy']:.4f}, easy accuracy "
          f"{report['easy']['accuracy']:.4f}, {elapsed:.1f}s")
    assert len(result.records) == 2000
    assert all(r.predicted in (POSITIVE, NEGATIVE) for r in result.records)
    assert report["accuracy"] >= 0.90
    assert report["easy"]["accuracy"] >= 0.95
    assert elapsed < 600.0


def test_criterion_7_batch_size_insensitivity(synthetic_corpus, synthetic_words):
    accuracies = {}
    for m in (10, 20, 40):
        for k in (1, 3):
            config = EngineConfig(m=m, k=k)
            report = evaluate(run(synthetic_corpus, synthetic_words, config=config),
                              synthetic_corpus)
            accuracies[(m, k)] = report["accuracy"]
    spread = max(accuracies.values()) - min(accuracies.values())
    print(f"criterion 7: accuracies {accuracies}, spread {spread:.4f}")
    assert spread <= 0.02


def test_criterion_8_near_linear_scaling():
    rows = bench_scaling([1000, 2000, 4000])
    ratios = [rows[i + 1][1] / rows[i][1] for i in range(len(rows) - 1)]
    print(f"criterion 8: totals {[round(r[1], 2) for r in rows]}, "
          f"doubling ratios {[round(r, 3) for r in ratios]}")
    assert all(r <= 2.6 for r in ratios)


def test_criterion_9_identical_seed_identical_bytes(sample_paths, tmp_path):
    corpus_path, lexicon_path = sample_paths
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        code = main(["label", "--corpus", corpus_path, "--lexicon", lexicon_path,
                     "--seed", "11", "--out", str(out)])
        assert code == 0
        outputs.append((out / "predictions.jsonl").read_bytes())
    print(f"criterion 9: {len(outputs[0])} prediction bytes per run")
    assert outputs[0] and outputs[0] == outputs[1]
