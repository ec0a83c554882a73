"""Architecture shape propagation, MAC counting, and sweep serialization."""

import json
import warnings

import pytest

from melgauge import GridWarning
from melgauge.arch import (
    FREQ_POOLS,
    TIME_POOLS,
    ArchSpec,
    ConvLayerSpec,
    PoolingPlan,
    arch_from_dict,
    arch_to_dict,
    count_macs,
    filter_extent,
    grid_cost_sweep,
    load_arch,
    musicnn_filter_heights,
    musicnn_frontend_spec,
    propagate_shapes,
    save_arch,
    sweep_to_csv,
    sweep_to_json,
    vgg_arch,
    vgg_pooling_plan,
)
from melgauge.exceptions import ShapeUnderflowError, UnsupportedConfigError
from melgauge.mel import MelConfig, benchmark_frames, enumerate_grid

GRID_RATES = (12000, 16000)
GRID_HOPS = (1, 2, 3, 4, 5, 10)
GRID_MELS = (128, 96, 48, 32, 24, 16, 8)


def oracle_vgg_macs(n_mels, frames, freq_pools, time_pools, tags=50):
    """Independent MAC count: explicit per-layer recurrence, no shared code."""
    channels = [1, 128, 384, 768, 2048]
    f, t = n_mels, frames
    per_layer = []
    for i in range(4):
        per_layer.append(9 * channels[i] * channels[i + 1] * f * t)
        f = f // freq_pools[i]
        t = t // time_pools[i]
    per_layer.append(channels[4] * tags)
    return per_layer


# ------------------------------------------------------------ building blocks


class TestLayerAndPlanValidation:
    def test_conv_layer_defaults(self):
        layer = ConvLayerSpec(3, 3, 128)
        assert layer.padding == "same"

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(filter_freq=0, filter_time=3, out_channels=8),
            dict(filter_freq=3, filter_time=0, out_channels=8),
            dict(filter_freq=3, filter_time=3, out_channels=0),
            dict(filter_freq=3, filter_time=3, out_channels=8, padding="full"),
        ],
    )
    def test_conv_layer_rejects(self, kwargs):
        with pytest.raises(ValueError):
            ConvLayerSpec(**kwargs)

    def test_plan_needs_four_entries(self):
        with pytest.raises(ValueError):
            PoolingPlan((2, 2, 2), (1, 1, 1, 1))

    def test_plan_rejects_zero(self):
        with pytest.raises(ValueError):
            PoolingPlan((2, 2, 2, 0), (1, 1, 1, 1))

    def test_vgg_arch_fixes_stack(self):
        plan = vgg_pooling_plan(96, 1, 12000)
        arch = vgg_arch(plan)
        assert [layer.out_channels for layer in arch.layers] == [128, 384, 768, 2048]
        assert all(l.filter_freq == 3 and l.filter_time == 3 for l in arch.layers)

    def test_vgg_requires_plan(self):
        layers = tuple(ConvLayerSpec(3, 3, c) for c in (128, 384, 768, 2048))
        with pytest.raises(ValueError):
            ArchSpec(name="vgg-cnn", layers=layers, pooling=None)

    def test_vgg_rejects_wrong_channels(self):
        layers = tuple(ConvLayerSpec(3, 3, c) for c in (64, 384, 768, 2048))
        with pytest.raises(ValueError):
            ArchSpec(name="vgg-cnn", layers=layers, pooling=vgg_pooling_plan(96, 1, 12000))

    def test_unknown_arch_name(self):
        with pytest.raises(ValueError):
            ArchSpec(name="resnet", layers=(ConvLayerSpec(3, 3, 8),))

    def test_musicnn_requires_segment_frames(self):
        with pytest.raises(ValueError):
            ArchSpec(name="musicnn-frontend", layers=(ConvLayerSpec(3, 3, 8),))


class TestPoolingPlanLookup:
    def test_known_cells(self):
        plan = vgg_pooling_plan(96, 1, 12000)
        assert plan.freq_pools == (2, 4, 3, 4)
        assert plan.time_pools == (4, 5, 8, 8)
        plan = vgg_pooling_plan(8, 10, 16000)
        assert plan.freq_pools == (2, 2, 2, 1)
        assert plan.time_pools == (4, 5, 9, 1)

    def test_off_table_mels(self):
        with pytest.raises(UnsupportedConfigError):
            vgg_pooling_plan(64, 1, 12000)

    def test_off_table_hop(self):
        with pytest.raises(UnsupportedConfigError):
            vgg_pooling_plan(96, 6, 12000)

    def test_off_table_rate(self):
        with pytest.raises(UnsupportedConfigError):
            vgg_pooling_plan(96, 1, 22050)

    def test_every_cell_closes_to_unit(self):
        # The defining property of the tables: every grid input lands on
        # exactly 1x1 out of the last block, no terminal pool needed.
        for sr in GRID_RATES:
            for hop in GRID_HOPS:
                frames = benchmark_frames(sr, hop)
                for mels in GRID_MELS:
                    arch = vgg_arch(vgg_pooling_plan(mels, hop, sr))
                    trace = propagate_shapes(arch, mels, frames)
                    assert trace.stack_output[:2] == (1, 1), (sr, hop, mels)
                    assert not trace.used_global_pool, (sr, hop, mels)
                    assert trace.final_shape == (1, 1, 2048)


# ------------------------------------------------------------ propagation


class TestPropagateShapes:
    def test_benchmark_trace(self):
        arch = vgg_arch(vgg_pooling_plan(96, 1, 12000))
        trace = propagate_shapes(arch, 96, 1366)
        assert trace.labels == ("input", "conv1", "conv2", "conv3", "conv4")
        assert trace.stages == (
            (96, 1366, 1),
            (48, 341, 128),
            (12, 68, 384),
            (4, 8, 768),
            (1, 1, 2048),
        )

    def test_identity_pools_preserve_dims(self):
        arch = vgg_arch(PoolingPlan((1, 1, 1, 1), (1, 1, 1, 1)))
        trace = propagate_shapes(arch, 96, 1366)
        assert trace.stack_output == (96, 1366, 2048)
        assert trace.used_global_pool
        assert trace.final_shape == (1, 1, 2048)
        assert trace.labels[-1] == "global-pool"

    def test_underflow_raises(self):
        arch = vgg_arch(vgg_pooling_plan(96, 1, 12000))
        with pytest.raises(ShapeUnderflowError):
            propagate_shapes(arch, 96, 100)  # 100 -> 25 -> 5 -> 0 in block 3

    def test_valid_padding_underflow(self):
        spec = musicnn_frontend_spec(96)
        with pytest.raises(ShapeUnderflowError):
            propagate_shapes(spec, 96, 3)  # narrower than the width-7 filters

    def test_rejects_empty_input(self):
        arch = vgg_arch(vgg_pooling_plan(96, 1, 12000))
        with pytest.raises(ValueError):
            propagate_shapes(arch, 0, 1366)

    def test_musicnn_trace_collapses_frequency(self):
        spec = musicnn_frontend_spec(96)
        trace = propagate_shapes(spec, 96, 188)
        assert trace.labels[0] == "input"
        assert trace.labels[1] == "frontend-concat"
        assert trace.stages[1] == (1, 188, 10 * 51)
        # same-padded 1x7 back-end keeps the time axis
        assert trace.stages[2:5] == ((1, 188, 512),) * 3
        assert trace.used_global_pool
        assert trace.final_shape == (1, 1, 512)


# ------------------------------------------------------------ MAC counting


class TestCountMacs:
    def test_first_layer_value(self):
        arch = vgg_arch(vgg_pooling_plan(96, 1, 12000))
        report = count_macs(arch, 96, 1366)
        # 3*3*1*128*96*1366
        assert report.per_layer_macs[0] == 151_068_672

    def test_against_recurrence_oracle(self):
        for sr in GRID_RATES:
            for hop in (1, 3, 10):
                frames = benchmark_frames(sr, hop)
                for mels in (128, 48, 8):
                    plan = vgg_pooling_plan(mels, hop, sr)
                    report = count_macs(vgg_arch(plan), mels, frames)
                    expected = oracle_vgg_macs(
                        mels, frames, plan.freq_pools, plan.time_pools
                    )
                    assert list(report.per_layer_macs) == expected, (sr, hop, mels)
                    assert report.total_macs == sum(expected)

    def test_benchmark_totals(self):
        cases = [
            (12000, 1, 96, 10_010_669_056),
            (12000, 1, 48, 5_005_385_728),
            (12000, 2, 96, 4_994_768_896),
            (12000, 10, 96, 984_924_160),
            (16000, 1, 96, 13_327_323_136),
        ]
        for sr, hop, mels, expected in cases:
            arch = vgg_arch(vgg_pooling_plan(mels, hop, sr))
            report = count_macs(arch, mels, benchmark_frames(sr, hop))
            assert report.total_macs == expected, (sr, hop, mels)

    def test_halving_mels_halves_cost(self):
        for sr in GRID_RATES:
            for hop in GRID_HOPS:
                frames = benchmark_frames(sr, hop)
                full = count_macs(vgg_arch(vgg_pooling_plan(96, hop, sr)), 96, frames)
                half = count_macs(vgg_arch(vgg_pooling_plan(48, hop, sr)), 48, frames)
                ratio = half.total_macs / full.total_macs
                assert abs(ratio - 0.5) < 0.005, (sr, hop, ratio)

    def test_hop_scaling_windows(self):
        for sr in GRID_RATES:
            for mels in (128, 96, 48):
                base = count_macs(
                    vgg_arch(vgg_pooling_plan(mels, 1, sr)), mels, benchmark_frames(sr, 1)
                ).total_macs
                double = count_macs(
                    vgg_arch(vgg_pooling_plan(mels, 2, sr)), mels, benchmark_frames(sr, 2)
                ).total_macs
                ten = count_macs(
                    vgg_arch(vgg_pooling_plan(mels, 10, sr)), mels, benchmark_frames(sr, 10)
                ).total_macs
                assert 0.48 <= double / base <= 0.52, (sr, mels)
                assert 0.08 <= ten / base <= 0.12, (sr, mels)

    def test_output_term(self):
        arch = vgg_arch(vgg_pooling_plan(96, 1, 12000))
        report = count_macs(arch, 96, 1366)
        assert report.layer_names[-1] == "output"
        assert report.per_layer_macs[-1] == 2048 * 50

    def test_output_tags_none_drops_term(self):
        arch = vgg_arch(vgg_pooling_plan(96, 1, 12000), output_tags=None)
        report = count_macs(arch, 96, 1366)
        assert "output" not in report.layer_names
        assert report.total_macs == 10_010_669_056 - 2048 * 50

    def test_feature_bytes(self):
        arch = vgg_arch(vgg_pooling_plan(96, 1, 12000))
        report = count_macs(arch, 96, 1366)
        assert report.feature_bytes == 96 * 1366 * 4 + 40

    def test_gmacs_units(self):
        arch = vgg_arch(vgg_pooling_plan(96, 1, 12000))
        report = count_macs(arch, 96, 1366)
        assert report.gmacs == pytest.approx(10.010669056)

    def test_vgg_nothing_approximate(self):
        report = count_macs(vgg_arch(vgg_pooling_plan(96, 1, 12000)), 96, 1366)
        assert report.approximate_layers == ()


# ------------------------------------------------------------ musicnn front-end


class TestMusicnnSpec:
    @pytest.mark.parametrize(
        "n_mels,expected", [(128, (115, 51)), (96, (86, 38)), (48, (43, 19))]
    )
    def test_filter_heights(self, n_mels, expected):
        assert musicnn_filter_heights(n_mels) == expected

    def test_heights_reject_tiny_input(self):
        with pytest.raises(ValueError):
            musicnn_filter_heights(7)

    def test_layer_ordering_and_padding(self):
        spec = musicnn_frontend_spec(96)
        shapes = [(l.filter_freq, l.filter_time) for l in spec.layers]
        assert shapes == [
            (38, 1), (38, 3), (38, 7),
            (86, 1), (86, 3), (86, 7),
            (1, 32), (1, 64), (1, 128), (1, 165),
        ]
        assert all(l.padding == "valid" for l in spec.layers[:6])
        assert all(l.padding == "same" for l in spec.layers[6:])
        assert all(l.out_channels == 51 for l in spec.layers)

    def test_segment_frames_follow_rate_and_hop(self):
        assert musicnn_frontend_spec(96, 16000).segment_frames == 188
        assert musicnn_frontend_spec(96, 12000).segment_frames == 141
        assert musicnn_frontend_spec(96, 16000, hop_multiplier=2).segment_frames == 94

    def test_default_backend(self):
        spec = musicnn_frontend_spec(96)
        assert len(spec.backend_layers) == 3
        assert all(
            (l.filter_freq, l.filter_time, l.out_channels, l.padding) == (1, 7, 512, "same")
            for l in spec.backend_layers
        )

    def test_frontend_only(self):
        spec = musicnn_frontend_spec(96, backend_layers=(), output_tags=None)
        report = count_macs(spec, 96, spec.segment_frames)
        assert all(name.startswith("front_") for name in report.layer_names)
        assert report.approximate_layers == ()

    def test_backend_marked_approximate(self):
        spec = musicnn_frontend_spec(96)
        report = count_macs(spec, 96, spec.segment_frames)
        assert report.approximate_layers == ("backend1", "backend2", "backend3", "output")

    def test_timbre_macs_use_valid_dims(self):
        spec = musicnn_frontend_spec(96, backend_layers=(), output_tags=None)
        report = count_macs(spec, 96, 188)
        by_name = dict(zip(report.layer_names, report.per_layer_macs))
        # height-38 width-3 filter slides over (96-38+1) x (188-3+1)
        assert by_name["front_38x3"] == 38 * 3 * 1 * 51 * 59 * 186
        # temporal filters keep full dims under same padding
        assert by_name["front_1x165"] == 1 * 165 * 1 * 51 * 96 * 188

    def test_filters_per_shape_scales_linearly(self):
        lean = count_macs(
            musicnn_frontend_spec(96, filters_per_shape=17, backend_layers=(), output_tags=None),
            96, 188,
        )
        full = count_macs(
            musicnn_frontend_spec(96, filters_per_shape=51, backend_layers=(), output_tags=None),
            96, 188,
        )
        assert full.total_macs == 3 * lean.total_macs


# ------------------------------------------------------------ physical extent


class TestFilterExtent:
    def test_benchmark_cell(self):
        config = MelConfig(12000, 96)
        hz, seconds = filter_extent(3, 3, config)
        assert hz == pytest.approx(187.5)
        assert seconds == pytest.approx(0.064)

    def test_halved_resolution_doubles_extent(self):
        config = MelConfig(12000, 48, hop_multiplier=2)
        hz, seconds = filter_extent(3, 3, config)
        assert hz == pytest.approx(375.0)
        assert seconds == pytest.approx(0.128)

    def test_rejects_bad_filter(self):
        with pytest.raises(ValueError):
            filter_extent(0, 3, MelConfig(12000, 96))


# ------------------------------------------------------------ grid sweep


class TestGridCostSweep:
    def test_full_grid_vgg(self):
        entries = grid_cost_sweep("vgg-cnn", enumerate_grid())
        assert len(entries) == 88
        assert all(e.report is not None and e.error is None for e in entries)

    def test_full_grid_musicnn(self):
        entries = grid_cost_sweep("musicnn-frontend", enumerate_grid())
        assert len(entries) == 88
        assert all(e.report is not None for e in entries)

    def test_inline_error_keeps_order(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GridWarning)
            configs = [MelConfig(12000, 96), MelConfig(12000, 64), MelConfig(12000, 48)]
        entries = grid_cost_sweep("vgg-cnn", configs)
        assert [e.config.n_mels for e in entries] == [96, 64, 48]
        assert entries[0].report is not None
        assert entries[1].report is None
        assert "64" in entries[1].error
        assert entries[2].report is not None

    def test_rejects_unknown_arch(self):
        with pytest.raises(ValueError):
            grid_cost_sweep("transformer", enumerate_grid())

    def test_target_frames_override(self):
        config = MelConfig(12000, 96, target_frames=1400)
        [entry] = grid_cost_sweep("vgg-cnn", [config])
        assert entry.report is not None
        plan = vgg_pooling_plan(96, 1, 12000)
        expected = oracle_vgg_macs(96, 1400, plan.freq_pools, plan.time_pools)
        assert entry.report.total_macs == sum(expected)

    def test_target_frames_underflow_stays_inline(self):
        # the x1 plan cannot close a half-width input; the row must carry
        # the error instead of aborting the sweep
        config = MelConfig(12000, 96, target_frames=683)
        [entry] = grid_cost_sweep("vgg-cnn", [config])
        assert entry.report is None
        assert "block 4" in entry.error


# ------------------------------------------------------------ serialization


class TestSerialization:
    def test_vgg_roundtrip(self):
        arch = vgg_arch(vgg_pooling_plan(48, 3, 16000))
        assert arch_from_dict(arch_to_dict(arch)) == arch

    def test_musicnn_roundtrip(self):
        spec = musicnn_frontend_spec(48, 12000, hop_multiplier=2)
        assert arch_from_dict(arch_to_dict(spec)) == spec

    def test_file_roundtrip(self, tmp_path):
        arch = vgg_arch(vgg_pooling_plan(96, 1, 12000))
        path = tmp_path / "arch.json"
        save_arch(path, arch)
        assert load_arch(path) == arch
        data = json.loads(path.read_text())
        assert data["name"] == "vgg-cnn"
        assert data["pooling"]["time_pools"] == [4, 5, 8, 8]

    def test_dict_is_json_ready(self):
        spec = musicnn_frontend_spec(96)
        text = json.dumps(arch_to_dict(spec))
        assert "musicnn-frontend" in text


class TestSweepOutput:
    def test_csv_header_and_shape(self):
        entries = grid_cost_sweep("vgg-cnn", enumerate_grid())
        text = sweep_to_csv(entries)
        lines = text.strip().split("\n")
        assert len(lines) == 89
        header = lines[0].split(",")
        assert header[:5] == [
            "config_id", "sample_rate", "n_mels", "hop_multiplier", "compression",
        ]
        assert "macs_conv1" in header
        assert header[-2:] == ["approximate", "error"]
        first = lines[1].split(",")
        assert first[0] == "12000Hz-128mel-x1-log"
        assert first[header.index("error")] == ""

    def test_csv_error_row(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GridWarning)
            configs = [MelConfig(12000, 96), MelConfig(12000, 64)]
        text = sweep_to_csv(grid_cost_sweep("vgg-cnn", configs))
        lines = text.strip().split("\n")
        header = lines[0].split(",")
        bad = lines[2].split(",")
        assert bad[header.index("total_macs")] == ""
        assert "64" in bad[header.index("error")]

    def test_csv_float_style(self):
        entries = grid_cost_sweep("vgg-cnn", [MelConfig(12000, 96)])
        text = sweep_to_csv(entries)
        row = text.strip().split("\n")[1].split(",")
        header = text.strip().split("\n")[0].split(",")
        assert row[header.index("gmacs")] == "10.0107"

    def test_json_parses_back(self):
        entries = grid_cost_sweep("musicnn-frontend", [MelConfig(16000, 96)])
        rows = json.loads(sweep_to_json(entries))
        assert len(rows) == 1
        row = rows[0]
        assert row["config_id"] == "16000Hz-96mel-x1-dB"
        assert row["per_layer_macs"]["front_86x7"] > 0
        assert row["approximate_layers"] == ["backend1", "backend2", "backend3", "output"]

    def test_json_error_row(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GridWarning)
            configs = [MelConfig(12000, 64)]
        rows = json.loads(sweep_to_json(grid_cost_sweep("vgg-cnn", configs)))
        assert "error" in rows[0]
        assert "total_macs" not in rows[0]
