"""
The confidence-adjusted ranking metric, step by step
====================================================

A ranked list can put the right answer first and still not deserve full
credit: if every candidate got nearly the same score, the win was luck.
CAR@k multiplies the ground-truth probability ratio by a confidence term
derived from the entropy of the top-k score distribution, so flat
rankings are pulled toward 0.5 and sharp correct rankings toward 1.0.

Run with: python3 demos/01_car_metric_walkthrough.py
"""

import numpy as np

from gareco import CarConfig, RankedList, car_at_k, confidence, entropy, softmax_z

# A query with five candidate figures. The ground truth is "f2" and the
# scorer put it first with a comfortable margin.
sharp = RankedList("demo", "walkthrough", [
    ("f2", 0.91), ("f4", 0.40), ("f1", 0.32), ("f3", 0.20), ("f5", 0.05),
])

# Step 1: z-score the top-k raw scores, then softmax into a distribution.
scores = [s for _, s in sharp.entries]
p = softmax_z(scores)
print("softmax over z-scores:", np.round(p, 4))

# Step 2: entropy of that distribution, in nats.
h = entropy(p)
print(f"entropy = {h:.4f} nats (uniform over 5 would be {np.log(5):.4f})")

# Step 3: entropy below the allowance h = alpha * ln(k) costs nothing;
# above it, confidence decays linearly to the 0.5 floor.
c = confidence(p, k=len(p), alpha=0.5)
print(f"confidence = {c:.4f}")

# Step 4: the full metric. ratio = p(ground truth) / p(top-1), which is
# 1.0 here because the ground truth IS the top-1.
result = car_at_k(sharp, {"f2"}, CarConfig(k=5, alpha=0.5))
print(f"CAR@5 = {result.car:.4f} (ratio {result.ratio:.2f} x confidence {result.confidence:.4f})")

# Now the same ranking order with almost no separation between scores.
# Top-1 is still correct, but the metric hands out half credit at best.
flat = RankedList("demo", "walkthrough", [
    ("f2", 0.501), ("f4", 0.500), ("f1", 0.499), ("f3", 0.498), ("f5", 0.497),
])
flat_result = car_at_k(flat, {"f2"}, CarConfig(k=5, alpha=0.5))
print(f"\nnear-uniform scores: CAR@5 = {flat_result.car:.4f} "
      f"(confidence {flat_result.confidence:.4f})")

# And a confidently wrong ranking: ground truth pushed below the cutoff.
wrong = RankedList("demo", "walkthrough", [
    ("f4", 0.95), ("f1", 0.90), ("f3", 0.85), ("f5", 0.80), ("f6", 0.75),
    ("f2", 0.05),
])
wrong_result = car_at_k(wrong, {"f2"}, CarConfig(k=5, alpha=0.5))
print(f"ground truth outside top-5: CAR@5 = {wrong_result.car}")

# The alpha knob sets how much entropy is tolerated before punishment.
# alpha = 1 disables the confidence term entirely.
print("\nalpha sweep on the sharp ranking:")
for alpha in (0.0, 0.25, 0.5, 0.75, 1.0):
    r = car_at_k(sharp, {"f2"}, CarConfig(k=5, alpha=alpha))
    print(f"  alpha={alpha:<5} confidence={r.confidence:.4f} CAR={r.car:.4f}")
