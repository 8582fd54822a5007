"""Acceptance gate: every criterion at its stated tolerance.

Each test prints its criterion's pass/fail line with the observed margin, so
`pytest -s tests/test_acceptance.py` doubles as the acceptance report. The
same criteria back `pim-model accept`.
"""

import pytest

from pimsim import acceptance


def _run(criterion_fn, cfg, **kw):
    result = criterion_fn(cfg, **kw) if kw else criterion_fn(cfg)
    print("\n" + result.line())
    assert result.passed, result.detail
    return result


def test_criterion_1_arithmetic_throughput(cfg):
    _run(acceptance.criterion_arithmetic, cfg)


def test_criterion_2_wram_streaming(cfg):
    _run(acceptance.criterion_wram, cfg)


def test_criterion_3_mram_latency_bandwidth(cfg):
    _run(acceptance.criterion_mram, cfg)


def test_criterion_4_stream_saturation(cfg):
    _run(acceptance.criterion_stream_saturation, cfg)


def test_criterion_5_strided_random(cfg):
    _run(acceptance.criterion_strided, cfg)


def test_criterion_6_roofline_knees(cfg):
    _run(acceptance.criterion_roofline, cfg)


def test_criterion_7_host_link(cfg):
    _run(acceptance.criterion_hostlink, cfg)


def test_criterion_8_functional_correctness(cfg):
    _run(acceptance.criterion_functional, cfg, seeds=100)


def test_criterion_9_scaling_shapes(cfg):
    _run(acceptance.criterion_scaling, cfg)


def test_criterion_10_variant_crossovers(cfg):
    _run(acceptance.criterion_crossovers, cfg)


def test_criterion_11_backend_agreement(cfg):
    _run(acceptance.criterion_backend_agreement, cfg, trials=1000)
