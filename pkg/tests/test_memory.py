import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pimsim.errors import CapacityError, ConfigError, DmaError
from pimsim.memory import (BandwidthReport, DmaRequest, dma_bandwidth,
                           dma_latency, mram_stream_bandwidth,
                           mram_stream_saturation, random_access_bandwidth,
                           strided_bandwidth, strided_crossover,
                           wram_stream_bandwidth)


def test_dma_latency_reference_points(dpu):
    assert dma_latency(DmaRequest("mram_to_wram", 8), dpu) == 81
    assert dma_latency(DmaRequest("mram_to_wram", 128), dpu) == 141
    assert dma_latency(DmaRequest("wram_to_mram", 2048), dpu) == 61 + 1024


def test_dma_size_validation(dpu):
    for bad in (0, 4, 12, 4096):
        with pytest.raises(DmaError):
            dma_latency(DmaRequest("mram_to_wram", bad), dpu)


def test_dma_bandwidth_values(dpu):
    assert dma_bandwidth(2048, "mram_to_wram", dpu) == pytest.approx(651.04e6, rel=1e-3)
    assert dma_bandwidth(8, "mram_to_wram", dpu) == pytest.approx(8 * 350e6 / 81)
    # asymptote: frequency / beta = 2 bytes per cycle = 700 MB/s
    assert dma_bandwidth(2048, "mram_to_wram", dpu) < 700e6


@given(st.integers(min_value=1, max_value=255))
@settings(max_examples=40, deadline=None)
def test_dma_bandwidth_monotone_in_size(size_units):
    from pimsim.config import load_config
    dpu = load_config().dpu
    size = size_units * 8
    if size + 8 <= dpu.dma_max_bytes:
        assert dma_bandwidth(size + 8, "mram_to_wram", dpu) > \
            dma_bandwidth(size, "mram_to_wram", dpu)


def test_read_write_symmetry_at_streaming_sizes(dpu):
    """Latency asymmetry is fixed-cost only, so bandwidth converges for the
    transfer sizes streaming kernels actually use."""
    for size in (512, 1024, 2048):
        read = dma_bandwidth(size, "mram_to_wram", dpu)
        write = dma_bandwidth(size, "wram_to_mram", dpu)
        assert abs(read - write) / read <= 0.06


def test_wram_stream_reference_points(dpu, table):
    assert wram_stream_bandwidth("COPY", 16, dpu, table).bandwidth == 2800e6
    assert wram_stream_bandwidth("ADD", 16, dpu, table).bandwidth == 1680e6
    assert wram_stream_bandwidth("SCALE", 16, dpu, table).bandwidth == pytest.approx(44.8e6)
    assert wram_stream_bandwidth("TRIAD", 16, dpu, table).bandwidth == pytest.approx(65.625e6)


def test_wram_stream_saturates_at_eleven(dpu, table):
    values = [wram_stream_bandwidth("COPY", t, dpu, table).bandwidth
              for t in range(1, 17)]
    assert values[:11] == sorted(values[:11])
    assert all(v == values[10] for v in values[10:])


def test_bandwidth_report_invariant(dpu, table):
    r = wram_stream_bandwidth("ADD", 7, dpu, table)
    assert r.bandwidth == pytest.approx(r.bytes_moved * dpu.frequency_hz / r.cycles)


def test_mram_stream_saturation_counts(dpu, table):
    expected = {"COPY-DMA": 2, "COPY": 4, "ADD": 6, "SCALE": 11, "TRIAD": 11}
    for variant, want in expected.items():
        sat, _ = mram_stream_saturation(variant, 1024, dpu, table)
        assert sat == want, variant


def test_copy_dma_bandwidth_close_to_measured(dpu, table):
    bw = mram_stream_bandwidth("COPY-DMA", 16, 1024, dpu, table).bandwidth
    assert bw == pytest.approx(624.02e6, rel=0.05)


def test_copy_dma_two_tasklets_beat_one(dpu, table):
    one = mram_stream_bandwidth("COPY-DMA", 1, 1024, dpu, table).bandwidth
    two = mram_stream_bandwidth("COPY-DMA", 2, 1024, dpu, table).bandwidth
    four = mram_stream_bandwidth("COPY-DMA", 4, 1024, dpu, table).bandwidth
    assert one < two
    assert two == pytest.approx(four, rel=0.01)


def test_scale_triad_match_wram_bound(dpu, table):
    for variant in ("SCALE", "TRIAD"):
        wram = wram_stream_bandwidth(variant, 16, dpu, table).bandwidth
        mram = mram_stream_bandwidth(variant, 16, 1024, dpu, table).bandwidth
        assert mram == pytest.approx(wram, rel=0.10)


def test_stream_wram_capacity_guard(dpu, table):
    with pytest.raises(CapacityError):
        mram_stream_bandwidth("ADD", 16, 2048, dpu, table)


def test_strided_reference_points(dpu):
    assert strided_bandwidth("coarse", 1, 16, dpu).bandwidth == pytest.approx(622.36e6, rel=0.05)
    assert strided_bandwidth("coarse", 16, 16, dpu).bandwidth == pytest.approx(38.95e6, rel=0.05)


def test_strided_coarse_decreasing(dpu):
    values = [strided_bandwidth("coarse", s, 16, dpu).bandwidth
              for s in (1, 2, 4, 8, 16, 32)]
    assert values == sorted(values, reverse=True)


def test_strided_crossover_between_8_and_16(dpu):
    coarse8 = strided_bandwidth("coarse", 8, 16, dpu).bandwidth
    fine8 = strided_bandwidth("fine", 8, 16, dpu).bandwidth
    coarse16 = strided_bandwidth("coarse", 16, 16, dpu).bandwidth
    fine16 = strided_bandwidth("fine", 16, 16, dpu).bandwidth
    assert coarse8 > fine8
    assert fine16 > coarse16
    assert 8 < strided_crossover(16, dpu) <= 16


def test_random_access_calibrated(dpu):
    assert random_access_bandwidth(16, dpu).bandwidth == pytest.approx(72.58e6, rel=0.10)


def test_random_access_monotone(dpu):
    assert random_access_bandwidth(1, dpu).bandwidth < \
        random_access_bandwidth(16, dpu).bandwidth


def test_random_access_naive_model_without_overlap(dpu):
    """With the overlap factor off, the serialized engine predicts the value
    the calibration exists to correct: 16 B per (81 + 65) cycles."""
    naive = dataclasses.replace(dpu, fine_dma_overlap=0.0)
    bw = random_access_bandwidth(16, naive).bandwidth
    assert bw == pytest.approx(16 * 350e6 / 146, rel=0.02)


def test_unknown_variant_rejected(dpu, table):
    with pytest.raises(ConfigError):
        wram_stream_bandwidth("SPIN", 4, dpu, table)
    with pytest.raises(ConfigError):
        strided_bandwidth("diagonal", 2, 4, dpu)
