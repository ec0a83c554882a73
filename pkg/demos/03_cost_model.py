"""MAC and storage costs across the configuration grid.

Costs the four-block stack per configuration and shows the two
headline effects: halving the mel count halves compute, and stretching
the hop shrinks both compute and storage nearly in proportion.
"""

from melgauge import (
    MelConfig,
    benchmark_frames,
    count_macs,
    filter_extent,
    grid_cost_sweep,
    musicnn_frontend_spec,
    vgg_arch,
    vgg_pooling_plan,
)

baseline = count_macs(vgg_arch(vgg_pooling_plan(96, 1, 12000)), 96, 1366)
print(f"baseline (96 mels, x1, 12 kHz): {baseline.gmacs:.2f} GMAC per clip, "
      f"{baseline.feature_bytes:,} feature bytes")
print("\nper-layer MACs:")
for name, macs in zip(baseline.layer_names, baseline.per_layer_macs):
    print(f"  {name:>7}: {macs:>14,}")

print("\nGMAC ratios vs baseline at 12 kHz:")
print(f"{'config':>10} {'GMAC':>8} {'ratio':>7}")
for mels, hop in ((96, 1), (48, 1), (96, 2), (48, 2), (96, 10)):
    report = count_macs(
        vgg_arch(vgg_pooling_plan(mels, hop, 12000)), mels, benchmark_frames(12000, hop)
    )
    print(f"{mels:>6}/x{hop:<3} {report.gmacs:>8.3f} {report.total_macs / baseline.total_macs:>7.3f}")

# sweep the whole grid in one call; errors would stay inline per row
from melgauge import enumerate_grid

entries = grid_cost_sweep("vgg-cnn", enumerate_grid())
worked = sum(1 for e in entries if e.report is not None)
print(f"\nfull sweep: {worked}/{len(entries)} configs costed")

# the parallel front-end model scales differently: its filters follow
# the mel count, so compute drops slower than the input shrinks
spec = musicnn_frontend_spec(96, 16000)
report = count_macs(spec, 96, spec.segment_frames)
print(f"\nparallel front-end at (96 mels, 16 kHz): {report.gmacs:.2f} GMAC "
      f"per {spec.segment_frames}-frame segment")
print(f"approximate entries: {', '.join(report.approximate_layers)}")

hz, seconds = filter_extent(3, 3, MelConfig(12000, 96))
print(f"\na 3x3 filter at (96 mels, x1, 12 kHz) spans {hz:.1f} Hz x {seconds * 1000:.0f} ms")
hz, seconds = filter_extent(3, 3, MelConfig(12000, 48, hop_multiplier=2))
print(f"the same filter at (48 mels, x2) spans {hz:.1f} Hz x {seconds * 1000:.0f} ms")
