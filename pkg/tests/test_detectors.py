from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from driftlab.core import RngHandle
from driftlab.detectors import (ADWIN, D3, DDM, IBDD, EventLog, Signal, auc_score,
                                make_detector, read_events)
from driftlab.errors import ConfigError, InputError
from oracles import (adwin_shift_delay, d3_identical_signal, d3_separable_signal,
                     ddm_shift_delay, ibdd_shift_delay, ibdd_stationary_alarms)

# frozen once from the oracle pilot (seeds 0..4, 10,000 steps, d=5, defaults)
IBDD_STATIONARY_BASELINE = [0, 0, 1, 2, 1]


# -- DDM ----------------------------------------------------------------------

def test_ddm_detects_error_increase():
    assert all(ddm_shift_delay(s) is not None for s in range(20))


def test_ddm_all_correct_is_stable():
    d = DDM()
    assert all(d.update(True) is Signal.STABLE for _ in range(5000))


def test_ddm_warmup_gate():
    d = DDM()
    assert all(d.update(False) is Signal.STABLE for _ in range(29))


def test_ddm_resets_after_drift():
    g = np.random.default_rng(0)
    d = DDM()
    for e in np.r_[g.random(1000) < 0.1, g.random(300) < 0.6]:
        if d.update(not e) is Signal.DRIFT:
            break
    assert d.n_detections == 1 and d.n == 0
    # a clean continuation sets a fresh minimum instead of re-alarming
    assert all(d.update(True) is Signal.STABLE for _ in range(1000))


def test_ddm_warning_precedes_drift():
    g = np.random.default_rng(1)
    d = DDM()
    sigs = [d.update(not e) for e in np.r_[g.random(1000) < 0.1, g.random(300) < 0.6]]
    first_drift = sigs.index(Signal.DRIFT)
    assert Signal.WARNING in sigs[:first_drift]


# -- ADWIN --------------------------------------------------------------------

def test_adwin_detects_shift_quickly():
    delays = [adwin_shift_delay(s) for s in range(20)]
    assert sum(d is not None and d <= 300 for d in delays) >= 19


def test_adwin_constant_is_stable():
    a = ADWIN()
    assert all(a.update(0.3) is Signal.STABLE for _ in range(5000))
    assert a.width == 5000 and a.estimation == pytest.approx(0.3)


def test_adwin_rejects_out_of_range():
    with pytest.raises(InputError):
        ADWIN().update(1.5)


def test_adwin_drop_removes_old_buckets():
    g = np.random.default_rng(2)
    a = ADWIN()
    for t, x in enumerate(np.r_[g.random(1000) < 0.2, g.random(1000) < 0.8].astype(float)):
        before = a.width
        if a.update(x) is Signal.DRIFT:
            assert a.width == before + 1 - a.last_dropped
            assert a.width < t + 1
            break
    else:
        pytest.fail("no drift")


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([0.2, 0.5, 0.9]))
def test_adwin_buckets_match_shadow_window(seed, p):
    g = np.random.default_rng(seed)
    a = ADWIN()
    shadow = deque()
    values = np.r_[g.random(5000) < p, g.random(5000) < 1 - p].astype(float)
    for x in values:
        a.update(x)
        shadow.append(x)
        for _ in range(a.last_dropped):
            shadow.popleft()
        assert a.width == len(shadow)
    assert a.total == sum(shadow)
    b = a.buckets()
    assert sum(s for s, _, _ in b) == a.width
    assert sum(t for _, t, _ in b) == a.total
    assert a.variance / a.width == pytest.approx(np.var(shadow), abs=1e-9)


def test_adwin_delay_monotone_in_delta():
    means = [np.mean([adwin_shift_delay(s, delta=d) for s in range(10)])
             for d in (0.1, 0.01, 0.002)]
    assert means[0] <= means[1] <= means[2]


def test_adwin_quiet_once_window_is_post_change():
    for s in range(10):
        g = np.random.default_rng(s)
        a = ADWIN()
        v = np.r_[g.random(1000) < 0.2, g.random(3000) < 0.8].astype(float)
        sigs = [a.update(x) for x in v]
        assert Signal.DRIFT not in sigs[2000:]


# -- D3 -----------------------------------------------------------------------

def test_auc_score():
    assert auc_score([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]) == 1.0
    assert auc_score([0, 1], [0.5, 0.5]) == 0.5
    with pytest.raises(InputError):
        auc_score([1, 1], [0.1, 0.2])


@pytest.mark.parametrize("disc", ["lr", "ht"])
def test_d3_separable_windows_drift(disc):
    assert all(d3_separable_signal(s, discriminator=disc) is Signal.DRIFT for s in range(10))


@pytest.mark.parametrize("disc", ["lr", "ht"])
def test_d3_identical_windows_mostly_stable(disc):
    stable = sum(d3_identical_signal(s, discriminator=disc) is Signal.STABLE for s in range(40))
    assert stable >= 36


def test_d3_gated_until_full():
    det = D3(3, rng=RngHandle(0))
    g = np.random.default_rng(0)
    for x in g.normal(size=(det.window + det.recent - 1, 3)):
        assert det.update(x) is Signal.STABLE
    assert det.n_checks == 0 and det.last_auc is None
    det.update(g.normal(size=3))
    assert det.n_checks == 1


def test_d3_deterministic():
    a = [d3_separable_signal(3, d=4), d3_identical_signal(3, d=4)]
    b = [d3_separable_signal(3, d=4), d3_identical_signal(3, d=4)]
    assert a == b


def test_d3_bad_config():
    with pytest.raises(ConfigError):
        D3(2, discriminator="svm")


# -- IBDD ---------------------------------------------------------------------

def test_ibdd_detects_shift_within_two_windows():
    for s in range(5):
        delay = ibdd_shift_delay(s)
        assert delay is not None and delay <= 2 * 200


def test_ibdd_constant_input_is_stable():
    det = IBDD(3, rng=RngHandle(0))
    for _ in range(1000):
        assert det.update(np.ones(3)) is Signal.STABLE
    assert det.msd and max(det.msd) == 0.0


@pytest.mark.slow
def test_ibdd_stationary_false_alarms_within_baseline():
    counts = [ibdd_stationary_alarms(s) for s in range(5)]
    assert sum(counts) <= sum(IBDD_STATIONARY_BASELINE)


def test_ibdd_quiet_once_window_is_post_change():
    g = np.random.default_rng(3)
    det = IBDD(4, rng=RngHandle(3))
    X = np.r_[g.normal(size=(600, 4)), g.normal(5.0, 1.0, size=(1400, 4))]
    sigs = [det.update(x) for x in X]
    assert Signal.DRIFT in sigs[600:800]
    assert Signal.DRIFT not in sigs[1000:]


def test_ibdd_dimension_check():
    with pytest.raises(InputError):
        IBDD(3).update([1.0, 2.0])


# -- shared -------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["DDM", "ADWIN", "D3-LR", "D3-HT", "IBDD"])
def test_make_detector(kind):
    det = make_detector(kind, 3, RngHandle(0))
    assert det.supervised == (kind in ("DDM", "ADWIN"))


def test_make_detector_unknown():
    with pytest.raises(ConfigError):
        make_detector("PH", 3)


def test_event_log_roundtrip(tmp_path):
    log = EventLog()
    log.add(5, "DDM", "warning")
    log.add(9, "DDM", "drift", "x")
    p = tmp_path / "events.csv"
    log.write(p, cell="DDM-NB/EL")
    log.write(p, cell="again", append=True)
    rows = read_events(p)
    assert [r["t"] for r in rows] == [5, 9, 5, 9]
    assert rows[1]["event"] == "drift" and rows[2]["cell"] == "again"
    assert log.count("drift") == 1
