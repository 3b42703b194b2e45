"""Acceptance criteria, one test per criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists
one PASS/FAIL line per criterion with the measured values.
"""

import json
import time

import numpy as np
import pytest

from oracles import (
    assoc_loop,
    cosine_loop,
    isotonic_brute,
    relerr,
    sigma_hat_loop,
    stress_loop,
    vos_objective_loop,
)
from simmap.cli import main
from simmap.corpus import CoOccurrenceMatrix, write_edge_list, zero_pair_fraction
from simmap.diagnostics import circularity, separation_ratio
from simmap.layout import pairwise_distances
from simmap.mds import MdsProblem, monotone_regression, multi_start, normalized_stress, smacof_run
from simmap.similarity import association_strength, cosine_indirect
from simmap.synthetic import random_connected_counts, two_block_corpus
from simmap.vos import VosProblem, ideal_location, proposition1_check, sigma_hat, vos_objective, vos_run, vos_multi_start

from conftest import make_corpus


def matrix(counts):
    return CoOccurrenceMatrix(tuple(f"i{k}" for k in range(len(counts))), np.asarray(counts))


def record(request, **values):
    for key, value in values.items():
        if isinstance(value, float):
            value = f"{value:.4g}"
        request.node.user_properties.append((key, value))


def nonincreasing(history, slack=1e-12):
    h = np.asarray(history)
    return np.all(np.diff(h) <= slack * np.abs(h[:-1]))


@pytest.mark.criterion(1, "stress / sigma_hat sequences nonincreasing (100 instances)")
def test_ac1_monotone_iterations(request):
    t0 = time.perf_counter()
    sizes = (10, 30, 50)
    violations = []
    worst = 0.0
    for k in range(100):
        n = sizes[k % 3]
        counts = random_connected_counts(n, density=0.15, rate=3.0, seed=1000 + k)
        sim = association_strength(matrix(counts))
        runs = {
            "interval": smacof_run(MdsProblem(sim.values, "similarity", "interval"), seed=k, max_iter=300).history,
            "ordinal": smacof_run(MdsProblem(sim.values, "similarity", "ordinal"), seed=k, max_iter=300).history,
            "vos": vos_run(VosProblem(sim), seed=k, max_iter=300).history,
        }
        for name, h in runs.items():
            h = np.asarray(h)
            rise = np.max(np.diff(h) / np.abs(h[:-1])) if h.size > 1 else 0.0
            worst = max(worst, float(rise))
            if not nonincreasing(h):
                violations.append((k, n, name))
    elapsed = time.perf_counter() - t0
    record(request, worst_relative_rise=worst, violations=len(violations), seconds=round(elapsed, 1))
    assert not violations, violations[:5]
    assert elapsed < 60


@pytest.mark.criterion(2, "unconstrained and constrained VOS optima agree (20 instances)")
def test_ac2_proposition1(request):
    t0 = time.perf_counter()
    sizes = (5, 10, 20)
    gaps, disparities, products = [], [], []
    for k in range(20):
        n = sizes[k % 3]
        counts = random_connected_counts(n, density=0.4, seed=2000 + k)
        report = proposition1_check(VosProblem(association_strength(matrix(counts))), seed=k, n_starts=10)
        gaps.append(report.objective_gap)
        disparities.append(report.procrustes_disparity)
        products.append(report.c_forward * report.c_backward)
    elapsed = time.perf_counter() - t0
    record(request, max_objective_gap=max(gaps), max_procrustes=max(disparities),
           product_range=f"[{min(products):.6f}, {max(products):.6f}]", seconds=round(elapsed, 1))
    assert max(gaps) < 1e-3
    assert max(disparities) < 1e-3
    assert all(0.999 <= p <= 1.001 for p in products)
    assert elapsed < 300


@pytest.mark.criterion(3, "interval MDS on 200 equal dissimilarities: circularity < 0.2")
def test_ac3_circular_map(request):
    t0 = time.perf_counter()
    n = 200
    problem = MdsProblem(np.ones((n, n)), "dissimilarity", "interval")
    layout = multi_start(problem, n_starts=3, master_seed=1)
    value = circularity(layout.coords)
    elapsed = time.perf_counter() - t0
    record(request, circularity=value, stress=layout.score, seconds=round(elapsed, 1))
    assert elapsed < 120
    assert value < 0.2


@pytest.mark.criterion(4, "two-block corpus: VOS separates blocks, MDS-AS circularity < 0.35")
def test_ac4_two_block_contrast(request):
    t0 = time.perf_counter()
    corpus = two_block_corpus(seed=1)
    zeros = zero_pair_fraction(corpus.matrix)
    sim = association_strength(corpus.matrix)
    weights = corpus.weights
    tags = corpus.clusters
    mds = multi_start(MdsProblem(sim.values, "similarity", "ordinal"), n_starts=3, master_seed=1,
                      anchor_weights=weights)
    vos = vos_multi_start(VosProblem(sim), n_starts=10, master_seed=1, anchor_weights=weights)
    sep_mds = separation_ratio(mds.coords, tags)
    sep_vos = separation_ratio(vos.coords, tags)
    circ_mds = circularity(mds.coords)
    block = np.asarray(tags)
    gap = float(np.linalg.norm(vos.coords[block == 0].mean(axis=0) - vos.coords[block == 1].mean(axis=0)))
    elapsed = time.perf_counter() - t0
    record(request, zero_fraction=zeros, sep_vos=sep_vos, sep_mds_as=sep_mds,
           circ_mds_as=circ_mds, vos_centroid_gap=gap, seconds=round(elapsed, 1))
    assert zeros >= 0.7
    assert sep_vos >= 1.5 and sep_vos >= sep_mds
    assert circ_mds < 0.35
    assert gap >= 1.0
    assert elapsed < 180


@pytest.mark.criterion(5, "ideal location is a stationary point of the objective (50 instances)")
def test_ac5_ideal_location(request):
    rng = np.random.default_rng(5)
    worst = 0.0
    for k in range(50):
        n = int(rng.integers(4, 16))
        counts = random_connected_counts(n, density=0.4, seed=5000 + k)
        problem = VosProblem(association_strength(matrix(counts)))
        x = rng.normal(size=(n, 2))
        i = int(rng.integers(n))
        x[i] = ideal_location(problem, x, i)
        scale = float(np.max(np.abs(x)))
        h = 1e-5 * scale
        grad = np.zeros(2)
        for a in range(2):
            e = np.zeros_like(x)
            e[i, a] = h
            grad[a] = (vos_objective(problem, x + e) - vos_objective(problem, x - e)) / (2 * h)
        # gradient units are similarity times length; normalize by both
        norm = np.linalg.norm(grad) / (scale * problem.similarities[i].sum())
        worst = max(worst, float(norm))
    record(request, worst_relative_gradient=worst)
    assert worst < 1e-6


@pytest.mark.criterion(6, "formula oracles, 1000 random inputs each, relative error 1e-12")
def test_ac6_formula_oracles(request):
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    worst = dict.fromkeys(["assoc", "cosine", "stress", "vos_objective", "sigma_hat", "monotone"], 0.0)
    for k in range(1000):
        n = int(rng.integers(3, 7))
        counts = random_connected_counts(n, density=0.5, seed=int(rng.integers(2**31)))
        m = matrix(counts)
        worst["assoc"] = max(worst["assoc"], relerr(association_strength(m).values, assoc_loop(counts.tolist())))
        worst["cosine"] = max(worst["cosine"], relerr(cosine_indirect(m).values, cosine_loop(counts.tolist())))

        x = rng.normal(size=(n, 2))
        dhat = np.triu(rng.uniform(0.1, 3.0, size=(n, n)), 1)
        dhat = dhat + dhat.T
        w = np.triu(rng.uniform(0.1, 2.0, size=(n, n)), 1)
        w = w + w.T
        p = MdsProblem(dhat, "dissimilarity", "ratio", w)
        worst["stress"] = max(worst["stress"], relerr(normalized_stress(p, dhat, x), stress_loop(dhat, w, x)))

        s = association_strength(m).values
        vp = VosProblem(s)
        worst["vos_objective"] = max(worst["vos_objective"],
                                     relerr(vos_objective(vp, x), vos_objective_loop(s, x)))
        worst["sigma_hat"] = max(worst["sigma_hat"], relerr(sigma_hat(vp, x), sigma_hat_loop(s, x)))

        size = int(rng.integers(1, 8))
        d = rng.uniform(0, 5, size=size)
        wt = rng.uniform(0.1, 3, size=size)
        keys = rng.integers(0, 4, size=size)
        fit = monotone_regression(d, wt, proximities=keys)
        worst["monotone"] = max(worst["monotone"], relerr(fit, isotonic_brute(d, wt, keys)))
    elapsed = time.perf_counter() - t0
    record(request, **{k: float(v) for k, v in worst.items()}, seconds=round(elapsed, 1))
    assert all(v < 1e-12 for v in worst.values()), worst
    assert elapsed < 30


@pytest.mark.criterion(7, "similarity scaling laws (100 instances each, 1e-12)")
def test_ac7_scaling_laws(request):
    rng = np.random.default_rng(7)
    worst_assoc = worst_cos = 0.0
    for k in range(100):
        n = int(rng.integers(4, 10))
        counts = random_connected_counts(n, density=0.5, seed=7000 + k)
        s1 = association_strength(matrix(counts)).values
        s2 = association_strength(matrix(2 * counts)).values
        worst_assoc = max(worst_assoc, relerr(s2, s1 / 2))

        item = int(rng.integers(n))
        lam = int(rng.integers(2, 9))
        scaled = counts.copy()
        scaled[item, :] *= lam
        scaled[:, item] *= lam
        c1 = cosine_indirect(matrix(counts)).values
        c2 = cosine_indirect(matrix(scaled)).values
        worst_cos = max(worst_cos, float(np.max(np.abs(c2[item] - c1[item]))))
    record(request, assoc_doubling=worst_assoc, cosine_profile_scaling=worst_cos)
    assert worst_assoc < 1e-12
    assert worst_cos < 1e-12


@pytest.mark.criterion(8, "CLI replays are byte-identical (documents and SVG)")
def test_ac8_determinism(request, tmp_path):
    edges = tmp_path / "edges.csv"
    counts = random_connected_counts(15, density=0.3, seed=8)
    write_edge_list(CoOccurrenceMatrix(tuple(f"n{k}" for k in range(15)), counts), edges)
    checked = 0
    for method in ("mds-ordinal", "mds-interval", "vos"):
        for similarity in ("assoc", "cosine"):
            outputs = []
            for rep in range(2):
                doc = tmp_path / f"{method}-{similarity}-{rep}.json"
                svg = tmp_path / f"{method}-{similarity}-{rep}.svg"
                assert main(["layout", "--method", method, "--similarity", similarity,
                             "--edges", str(edges), "--out", str(doc), "--starts", "4", "--seed", "3"]) == 0
                assert main(["export-svg", "--map", str(doc), "--out", str(svg)]) == 0
                outputs.append((doc.read_bytes(), svg.read_bytes()))
            assert outputs[0] == outputs[1], (method, similarity)
            checked += 1
    reports = []
    for rep in range(2):
        out = tmp_path / f"cmp{rep}.json"
        assert main(["compare", "--edges", str(edges), "--out", str(out), "--starts", "3", "--no-figure"]) == 0
        reports.append((out.read_bytes(), out.with_suffix(".tsv").read_bytes()))
    assert reports[0] == reports[1]
    assert "proposition1" in json.loads(reports[0][0])
    record(request, layout_configs=checked, compare_replays=2)


@pytest.mark.criterion(9, "small exact optima: n=2 VOS distance 1, n=3 equilateral")
def test_ac9_small_optima(request):
    two = []
    for s in (0.01, 0.5, 1.0, 3.0, 250.0):
        for seed in range(5):
            layout = vos_run(VosProblem(s * (np.ones((2, 2)) - np.eye(2))), seed=seed)
            two.append(abs(np.linalg.norm(layout.coords[0] - layout.coords[1]) - 1.0))

    def spread(x):
        return float(np.ptp(pairwise_distances(x)[np.triu_indices(3, 1)]))

    equal = np.ones((3, 3)) - np.eye(3)
    # objective-based stopping gives distances accurate to about sqrt(eps)
    vos_spread = max(spread(vos_run(VosProblem(0.7 * equal), seed=k, eps=1e-14).coords) for k in range(5))
    vos_side = max(abs(pairwise_distances(vos_run(VosProblem(equal), seed=k, eps=1e-14).coords)[0, 1] - 1)
                   for k in range(5))
    mds_spread = max(
        spread(smacof_run(MdsProblem(equal, "dissimilarity", family), seed=k).coords)
        for family in ("ratio", "interval", "ordinal")
        for k in range(5)
    )
    record(request, n2_max_error=max(two), vos_spread=vos_spread, vos_side_error=vos_side, mds_spread=mds_spread)
    assert max(two) <= 2.3e-16
    assert vos_spread < 1e-6 and vos_side < 1e-6
    assert mds_spread < 1e-6


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
