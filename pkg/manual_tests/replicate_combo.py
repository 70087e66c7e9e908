#!/usr/bin/env python3
"""
Combined-data check on user-supplied transcriptions of the nine sources

Usage: python manual_tests/replicate_combo.py <manifest> [<manifest> ...]

Subsamples every source to the same size, then checks that the Poisson-CH
99% credible interval for tau lies inside [0.5, 0.6] and that QLk
cross-validates at least as well as the single-parameter models.
"""
import os
import sys

sys.path.append('/app' if os.path.exists('/app') else '.')

from datasets import DatasetError, load_dataset, subsample_combine
from estimation import FoldPlan, cross_validate
from models.registry import default_registry
from posterior import PosteriorSampleSet, credible_interval, grid_posterior_1d
from utils.logging_setup import setup_logging

PER_SOURCE = 400
SEED = 2024
TAU_RANGE = (0.5, 0.6)
COMPARED = ["QRE", "Lk", "Poisson-CH", "QLk"]


def main(paths) -> bool:
    print("🔧 Combined-data replication check")
    print("=" * 50)

    print("1. Loading sources...")
    try:
        datasets = [load_dataset(path) for path in paths]
    except DatasetError as e:
        print(f"❌ {e}")
        return False
    for ds in datasets:
        print(f"   {ds.source}: {len(ds.games)} games, {ds.size} observations")

    per_source = min(PER_SOURCE, min(ds.size for ds in datasets))
    print(f"\n2. Subsampling {per_source} observations per source...")
    combined = subsample_combine(datasets, per_source, SEED)
    print(f"✅ Combined set: {len(combined.games)} games, {combined.size} observations")

    registry = default_registry()

    print("\n3. Poisson-CH grid posterior over tau...")
    grid = grid_posterior_1d(registry.resolve("Poisson-CH"), combined, 0.0, 10.0, 0.01)
    samples = PosteriorSampleSet.from_grid("tau", *zip(*grid))
    lower, upper = credible_interval(samples, "tau", 0.99)
    inside = TAU_RANGE[0] <= lower and upper <= TAU_RANGE[1]
    print(f"   99% interval: [{lower:.3f}, {upper:.3f}]")
    print("✅ Interval inside [0.5, 0.6]" if inside else "❌ Interval outside [0.5, 0.6]")

    print("\n4. Cross-validating on the combined set (10 x 10)...")
    plan = FoldPlan.create(combined, folds=10, rounds=10, unit="obs", seed=SEED)
    ratios = {}
    for name in COMPARED:
        score = cross_validate(registry.resolve(name), combined, plan)
        ratios[name] = score.log10_ratio
        print(f"   {name}: 10^{score.log10_ratio:.1f} ± {score.log10_ci_half_width:.1f}")
    ordered = all(ratios["QLk"] >= ratios[name] for name in ("QRE", "Lk", "Poisson-CH"))
    print("✅ QLk leads the single-parameter models" if ordered else "❌ QLk does not lead")

    return inside and ordered


if __name__ == "__main__":
    if len(sys.argv) < 2:
        print(__doc__)
        sys.exit(2)
    setup_logging("WARNING")
    sys.exit(0 if main(sys.argv[1:]) else 1)
