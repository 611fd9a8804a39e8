"""Smoke test for the corpverify Python extension."""

import math
import random

import corpverify as cv

assert cv.brier(0.3, False) == 0.09
assert cv.elementary_score(0.5, 0.6, False) == 1.0
assert math.isinf(cv.log_score(0.0, True))

rng = random.Random(3)
x = [rng.random() for _ in range(500)]
y = [rng.random() < p for p in x]
pairs = cv.PairSet(x, y)
assert len(pairs) == 500

for rule in (cv.ScoringRule.brier(), cv.ScoringRule.elementary(0.3), cv.ScoringRule.firm([0.2, 0.6], [1.0, 2.0])):
    d = cv.corp_decompose(pairs, rule)
    assert abs(d.mean_score - (d.mcb - d.dsc + d.unc)) < 1e-12, rule
    assert d.mcb >= -1e-12 and d.dsc >= -1e-12

fit = cv.pav_fit(cv.PairSet([0.1, 0.2, 0.3, 0.4], [0, 1, 0, 1]))
assert [b[2] for b in fit.blocks] == [0.0, 0.5, 1.0]

curve = cv.murphy_curve(pairs)
assert abs(curve.integral() - cv.mean_score(pairs)) < 1e-10

roc = cv.roc_curve(pairs)
assert 0.5 < roc.auc <= 1.0
best = cv.max_csi(pairs)
assert best is not None and 0.0 < best[0] <= 1.0
assert 0.0 < cv.auc_pr(pairs) <= 1.0
assert cv.contingency(pairs, 0.5)["hits"] > 0

dm = cv.dm_test([0.0] * 50)
assert dm["statistic"] == 0.0 and dm["ci"] == (0.0, 0.0)

systems = {s["name"]: s for s in cv.synthetic_experiment(n_trials=20000, seed=1)}
assert systems["Ideal"]["max_csi"] == systems["Under"]["max_csi"] == systems["Over"]["max_csi"]
assert systems["Ideal"]["mean_brier"] < systems["Under"]["mean_brier"] < systems["Over"]["mean_brier"]

print("python smoke test passed")
