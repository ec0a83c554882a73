"""Show how the pooling plan adapts to the input resolution.

For every benchmark cell the four-block stack must squeeze the mel
matrix to exactly 1x1 before the classifier. The plan lookup changes
the per-block pool windows instead of the architecture.
"""

from melgauge import (
    benchmark_frames,
    propagate_shapes,
    vgg_arch,
    vgg_pooling_plan,
)

print("pooling plans at 12 kHz:")
print(f"{'mels':>5} {'hop':>4} {'freq pools':>12} {'time pools':>12} {'input':>12}")
for mels in (128, 96, 48):
    for hop in (1, 2, 10):
        plan = vgg_pooling_plan(mels, hop, 12000)
        frames = benchmark_frames(12000, hop)
        freq = "x".join(str(p) for p in plan.freq_pools)
        time = "x".join(str(p) for p in plan.time_pools)
        print(f"{mels:>5} {hop:>4} {freq:>12} {time:>12} {mels:>5}x{frames}")

arch = vgg_arch(vgg_pooling_plan(96, 1, 12000))
trace = propagate_shapes(arch, 96, benchmark_frames(12000, 1))
print("\nshape trace at (96 mels, x1, 12 kHz):")
for label, (freq, time, channels) in zip(trace.labels, trace.stages):
    print(f"  {label:>6}: {freq:>3} x {time:>4} x {channels}")
print(f"  terminal global pool needed: {trace.used_global_pool}")

# every cell closes; prove it for the whole table
count = 0
for rate in (12000, 16000):
    for hop in (1, 2, 3, 4, 5, 10):
        for mels in (128, 96, 48, 32, 24, 16, 8):
            arch = vgg_arch(vgg_pooling_plan(mels, hop, rate))
            trace = propagate_shapes(arch, mels, benchmark_frames(rate, hop))
            assert trace.final_shape[:2] == (1, 1) and not trace.used_global_pool
            count += 1
print(f"\nall {count} grid cells close to 1x1 with no safety net")
