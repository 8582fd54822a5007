import dataclasses

import pytest

from pimsim.errors import TransferPlanError
from pimsim.hostlink import (TransferPlan, rank_partition,
                             system_transfer_time, transfer_time)

MB32 = 32 * 1024 * 1024


def test_single_dpu_calibration(cfg):
    ctd = transfer_time(TransferPlan("serial", "cpu_to_dpu", (MB32,)), cfg)
    dtc = transfer_time(TransferPlan("serial", "dpu_to_cpu", (MB32,)), cfg)
    assert ctd.effective_bandwidth == pytest.approx(0.33e9, rel=0.02)
    assert dtc.effective_bandwidth == pytest.approx(0.12e9, rel=0.02)


def test_parallel_rank_calibration(cfg):
    ctd = transfer_time(TransferPlan("parallel", "cpu_to_dpu", (MB32,) * 64), cfg)
    dtc = transfer_time(TransferPlan("parallel", "dpu_to_cpu", (MB32,) * 64), cfg)
    assert ctd.effective_bandwidth == pytest.approx(6.68e9, rel=0.02)
    assert dtc.effective_bandwidth == pytest.approx(4.74e9, rel=0.02)


def test_broadcast_calibration(cfg):
    bw = transfer_time(TransferPlan("broadcast", "cpu_to_dpu", (MB32,) * 64),
                       cfg).effective_bandwidth
    assert bw == pytest.approx(16.88e9, rel=0.02)


def test_serial_bandwidth_flat_in_dpu_count(cfg):
    values = [transfer_time(TransferPlan("serial", "cpu_to_dpu", (MB32,) * n),
                            cfg).effective_bandwidth for n in (1, 2, 8, 64)]
    assert max(values) == pytest.approx(min(values), rel=1e-12)


def test_parallel_speedups_anchor(cfg):
    one = transfer_time(TransferPlan("parallel", "cpu_to_dpu", (MB32,)), cfg)
    full = transfer_time(TransferPlan("parallel", "cpu_to_dpu", (MB32,) * 64), cfg)
    assert full.effective_bandwidth / one.effective_bandwidth == \
        pytest.approx(20.13, rel=1e-6)
    one = transfer_time(TransferPlan("parallel", "dpu_to_cpu", (MB32,)), cfg)
    full = transfer_time(TransferPlan("parallel", "dpu_to_cpu", (MB32,) * 64), cfg)
    assert full.effective_bandwidth / one.effective_bandwidth == \
        pytest.approx(38.76, rel=1e-6)


def test_bandwidth_grows_with_size(cfg):
    sizes = [8, 2048, 1 << 16, 1 << 22, MB32]
    bws = [transfer_time(TransferPlan("serial", "cpu_to_dpu", (s,)),
                         cfg).effective_bandwidth for s in sizes]
    assert bws == sorted(bws)


def test_time_monotone_in_size(cfg):
    t1 = transfer_time(TransferPlan("serial", "cpu_to_dpu", (1 << 20,)), cfg)
    t2 = transfer_time(TransferPlan("serial", "cpu_to_dpu", (1 << 21,)), cfg)
    assert t2.seconds > t1.seconds


def test_rank_ceiling(cfg):
    big = dataclasses.replace(
        cfg, host_link=dataclasses.replace(
            cfg.host_link, broadcast_bmax_bytes_per_s=100e9))
    bw = transfer_time(TransferPlan("broadcast", "cpu_to_dpu", (MB32,) * 64),
                       big).effective_bandwidth
    assert bw <= 19.2e9 + 1


def test_parallel_requires_equal_sizes():
    with pytest.raises(TransferPlanError):
        TransferPlan("parallel", "cpu_to_dpu", (8, 16))


def test_broadcast_is_cpu_to_dpu_only():
    with pytest.raises(TransferPlanError):
        TransferPlan("broadcast", "dpu_to_cpu", (8, 8))


def test_zero_bytes_zero_time(cfg):
    r = transfer_time(TransferPlan("serial", "cpu_to_dpu", (0, 0)), cfg)
    assert r.seconds == 0.0


def test_rank_partition_identity_for_one_rank(cfg):
    plan = TransferPlan("parallel", "cpu_to_dpu", (MB32,) * 64)
    subs = rank_partition(plan, cfg)
    assert len(subs) == 1 and subs[0] == plan
    assert system_transfer_time(plan, cfg).seconds == \
        transfer_time(plan, cfg).seconds


def test_ranks_serialize(cfg):
    two_ranks = dataclasses.replace(cfg, n_ranks=2)
    plan64 = TransferPlan("parallel", "cpu_to_dpu", (MB32,) * 64)
    plan128 = TransferPlan("parallel", "cpu_to_dpu", (MB32,) * 128)
    one = system_transfer_time(plan64, two_ranks).seconds
    both = system_transfer_time(plan128, two_ranks).seconds
    assert both == pytest.approx(2 * one, rel=1e-9)


def test_overcommitted_dpus_rejected(cfg):
    plan = TransferPlan("parallel", "cpu_to_dpu", (8,) * 65)
    with pytest.raises(TransferPlanError):
        rank_partition(plan, cfg)
