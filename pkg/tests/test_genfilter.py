"""
Formula generation, EIC filtering and corpus divergences.
"""
from collections import Counter

import numpy as np
import pytest

from eicsr.core.exceptions import BinMismatchError, EmptyCorpusError, FilterExhaustedError
from eicsr.core.expression import Binary, Unary, complexity, iter_nodes, to_string, variables_used
from eicsr.core.parser import parse
from eicsr.schemas.config import EicConfig, FilterConfig, GeneratorConfig
from eicsr.services import genfilter
from eicsr.services.eic import calculate_eic
from eicsr.services.genfilter import (
    FeatureHistogram,
    build_corpus,
    compare_corpora,
    count_trees,
    featurize,
    generate,
    generate_filtered,
    js_divergence,
    kl_divergence,
    probe_dataset,
)
from eicsr.services.reference import REFERENCE_FORMULAS, reference_corpus


class TestShapes:
    @pytest.mark.parametrize("ops,expected", [(0, 1), (1, 1), (2, 2), (3, 5), (4, 14), (5, 42)])
    def test_single_root_counts_are_catalan(self, ops, expected):
        assert count_trees(1, ops) == expected

    def test_no_empty_nodes(self):
        assert count_trees(0, 3) == 0

    def test_two_operator_shapes_are_uniform(self):
        rng = np.random.default_rng(0)
        shapes = Counter(tuple(genfilter._shape(2, rng)) for _ in range(4000))
        assert len(shapes) == 2
        assert all(abs(n / 4000 - 0.5) < 0.04 for n in shapes.values())


class TestGenerate:
    def test_seeded(self):
        cfg = GeneratorConfig(n_vars=2, seed=1)
        rng_a, rng_b = np.random.default_rng(1), np.random.default_rng(1)
        assert [generate(cfg, rng_a) for _ in range(5)] == [generate(cfg, rng_b) for _ in range(5)]

    def test_node_bound_and_printability(self):
        cfg = GeneratorConfig(n_vars=3)
        rng = np.random.default_rng(2)
        for _ in range(2000):
            e = generate(cfg, rng)
            assert complexity(e) <= 2 * cfg.max_binary_ops + cfg.max_unary_ops + 1
            assert complexity(parse(to_string(e))) == complexity(e)

    def test_every_operator_appears(self):
        cfg = GeneratorConfig()
        rng = np.random.default_rng(3)
        seen = set()
        for _ in range(2000):
            for _, node in iter_nodes(generate(cfg, rng)):
                if isinstance(node, (Unary, Binary)):
                    seen.add(node.op)
        assert seen == set(cfg.unary_weights) | set(cfg.binary_weights)

    def test_variables_stay_in_range(self):
        cfg = GeneratorConfig(n_vars=2, leaf_constant_prob=0.0)
        rng = np.random.default_rng(4)
        for _ in range(200):
            assert "x3" not in to_string(generate(cfg, rng))

    def test_binary_only(self):
        cfg = GeneratorConfig(max_unary_ops=0, unary_weights={})
        rng = np.random.default_rng(5)
        for _ in range(200):
            assert not any(isinstance(node, Unary) for _, node in iter_nodes(generate(cfg, rng)))

    def test_empty_weights_rejected(self):
        with pytest.raises(ValueError):
            GeneratorConfig(max_binary_ops=2, binary_weights={})

    def test_binary_count_floor(self):
        cfg = GeneratorConfig(min_binary_ops=3, max_binary_ops=5)
        rng = np.random.default_rng(11)
        for _ in range(300):
            e = generate(cfg, rng)
            assert 3 <= sum(isinstance(n, Binary) for _, n in iter_nodes(e)) <= 5

    def test_every_formula_has_a_variable(self):
        cfg = GeneratorConfig(leaf_constant_prob=0.9)
        rng = np.random.default_rng(12)
        assert all(variables_used(generate(cfg, rng)) for _ in range(300))

    def test_binary_bounds_ordered(self):
        with pytest.raises(ValueError):
            GeneratorConfig(min_binary_ops=5, max_binary_ops=4)


class TestFilter:
    def test_accepted_formulas_rescore_below_theta(self):
        gcfg = GeneratorConfig(max_binary_ops=4, max_unary_ops=2)
        fcfg = FilterConfig(theta=2.0)
        probe = probe_dataset(gcfg, fcfg)
        rng = np.random.default_rng(6)
        for _ in range(25):
            expr, attempts = generate_filtered(gcfg, fcfg, rng, probe)
            assert attempts >= 1
            assert calculate_eic(expr, probe, fcfg.eic_cfg).overall <= 2.0

    def test_output_is_first_accepted_raw_draw(self):
        gcfg = GeneratorConfig(max_binary_ops=4, max_unary_ops=2)
        fcfg = FilterConfig(theta=2.0)
        probe = probe_dataset(gcfg, fcfg)
        for seed in range(5):
            expr, attempts = generate_filtered(gcfg, fcfg, np.random.default_rng(seed), probe)
            raw = np.random.default_rng(seed)
            draws = [generate(gcfg, raw) for _ in range(attempts)]
            assert draws[-1] == expr
            assert all(calculate_eic(e, probe, fcfg.eic_cfg).overall > 2.0 for e in draws[:-1])

    def test_vacuous_threshold_matches_unfiltered(self):
        gcfg = GeneratorConfig(max_binary_ops=4, max_unary_ops=2)
        fcfg = FilterConfig(theta=EicConfig().eic_cap)
        filtered = build_corpus(20, gcfg, fcfg, seed=8)
        plain = build_corpus(20, gcfg, seed=8)
        assert [r.formula for r in filtered] == [r.formula for r in plain]
        assert all(r.attempts == 1 for r in filtered)

    def test_exhaustion(self, monkeypatch):
        monkeypatch.setattr(genfilter, "generate", lambda cfg, rng: parse("(x1+1e10)-1e10"))
        fcfg = FilterConfig(theta=2.0, max_retries=5)
        with pytest.raises(FilterExhaustedError) as info:
            generate_filtered(GeneratorConfig(), fcfg, np.random.default_rng(0))
        assert info.value.details["max_retries"] == 5

    def test_corpus_records(self):
        records = build_corpus(10, GeneratorConfig(max_binary_ops=3), FilterConfig(), seed=1)
        assert len(records) == 10
        for r in records:
            assert r.eic <= 2.0
            assert complexity(parse(r.formula)) == r.complexity

    def test_corpus_is_seeded(self):
        cfg = GeneratorConfig(max_binary_ops=3)
        assert build_corpus(5, cfg, seed=4) == build_corpus(5, cfg, seed=4)

    def test_probe_range_validated(self):
        with pytest.raises(ValueError):
            FilterConfig(probe_low=5.0, probe_high=1.0)


class TestFeaturize:
    def test_leaf(self):
        hist = featurize([parse("x1")])
        assert hist["variables"][1] == pytest.approx(1.0)
        assert hist["operators"][0] == pytest.approx(1.0)
        assert hist["length"][0] == pytest.approx(1.0)

    def test_counts_distinct_variables(self):
        hist = featurize([parse("x1+x1")])
        assert hist["variables"][1] == pytest.approx(1.0)
        assert hist["operators"][1] == pytest.approx(1.0)
        assert hist["length"][2] == pytest.approx(1.0)

    def test_overflow_bins(self):
        big = parse("+".join(["x1"] * 40))
        hist = featurize([big])
        assert hist["operators"][-1] == pytest.approx(1.0)
        assert hist["length"][-1] == pytest.approx(1.0)

    def test_distributions_sum_to_one(self):
        hist = featurize(reference_corpus())
        for feature in genfilter.FEATURES:
            assert hist[feature].sum() == pytest.approx(1.0, abs=1e-9)
            assert (hist[feature] > 0).all()

    def test_order_does_not_matter(self):
        corpus = list(reference_corpus())
        a = featurize(corpus)
        b = featurize(corpus[::-1])
        for feature in genfilter.FEATURES:
            np.testing.assert_allclose(a[feature], b[feature])

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpusError):
            featurize([])


class TestDivergence:
    def test_identical_histograms(self):
        p = featurize(reference_corpus())
        assert all(v == pytest.approx(0.0, abs=1e-12) for v in js_divergence(p, p).values())
        assert all(v == pytest.approx(0.0, abs=1e-12) for v in kl_divergence(p, p).values())

    def test_disjoint_support_is_one_bit(self):
        p = featurize([parse("x1")])
        q = featurize([parse("x1*x2*x1*x2")])
        js = js_divergence(p, q)
        for feature in ("variables", "operators", "length"):
            assert js[feature] == pytest.approx(1.0, abs=1e-6)
        assert js["constants"] == pytest.approx(0.0, abs=1e-12)

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(9)
        cfg = GeneratorConfig()
        p = featurize([generate(cfg, rng) for _ in range(200)])
        q = featurize(reference_corpus())
        forward, backward = js_divergence(p, q), js_divergence(q, p)
        for feature in genfilter.FEATURES:
            assert forward[feature] == pytest.approx(backward[feature])
            assert 0.0 <= forward[feature] <= 1.0
        assert all(v >= 0.0 for v in kl_divergence(p, q).values())

    def test_bin_mismatch(self):
        p = featurize([parse("x1")])
        q = FeatureHistogram(distributions={k: v[:-1] for k, v in p.distributions.items()})
        with pytest.raises(BinMismatchError):
            js_divergence(p, q)

    def test_compare_rows(self):
        rng = np.random.default_rng(10)
        cfg = GeneratorConfig()
        corpora = {
            "a": [generate(cfg, rng) for _ in range(50)],
            "b": list(reference_corpus()),
        }
        rows = compare_corpora(corpora, reference_corpus())
        assert len(rows) == 8
        assert all(r.js_reduction is None for r in rows if r.corpus == "a")
        assert all(r.js_reduction == pytest.approx(1.0) for r in rows if r.corpus == "b")


class TestReference:
    def test_all_formulas_parse(self):
        assert len(reference_corpus()) == len(REFERENCE_FORMULAS) >= 50


@pytest.mark.slow
@pytest.mark.parametrize("n_vars", [2, 3])
def test_filtering_moves_corpus_towards_reference(n_vars):
    gcfg = GeneratorConfig(n_vars=n_vars)
    filtered = [parse(r.formula) for r in build_corpus(1024, gcfg, FilterConfig(), seed=0)]
    plain = [parse(r.formula) for r in build_corpus(1024, gcfg, seed=0)]
    rows = compare_corpora({"plain": plain, "filtered": filtered}, reference_corpus())
    js = {(r.corpus, r.feature): r.js for r in rows}
    closer = sum(js["filtered", f] < js["plain", f] for f in genfilter.FEATURES)
    assert closer >= 3
    length = next(r for r in rows if r.corpus == "filtered" and r.feature == "length")
    assert length.js_reduction is not None and length.js_reduction >= 0.10


@pytest.mark.slow
def test_thousand_filtered_formulas_rescore_below_theta():
    gcfg = GeneratorConfig()
    fcfg = FilterConfig(theta=2.0)
    probe = probe_dataset(gcfg, fcfg)
    rng = np.random.default_rng(13)
    for _ in range(1000):
        expr, _ = generate_filtered(gcfg, fcfg, rng, probe)
        assert calculate_eic(expr, probe, fcfg.eic_cfg).overall <= 2.0
