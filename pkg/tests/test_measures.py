import math
import random
import statistics

import pytest

from adt.measures import (
    DetectorConfig,
    EventKind,
    GazeEvent,
    GazeSample,
    KValue,
    OrderingError,
    detect_events,
    experiment_k,
    group_k,
    traditional_measures,
    window_k,
)


def make_samples(points, user="u1", start_seq=1):
    """points: iterable of (t, x, y)."""
    return [
        GazeSample(
            user_id=user,
            seq=start_seq + i,
            t_origin=float(t),
            x=float(x),
            y=float(y),
            pupil_diameter=3.5,
            confidence=1.0,
        )
        for i, (t, x, y) in enumerate(points)
    ]


def events_from_pairs(pairs, t0=0.0, sac_ms=40.0):
    """Build an alternating fixation/saccade stream realizing (d, a) pairs."""
    events = []
    t = t0
    cx = 0.0
    for d, a in pairs:
        fix = GazeEvent(EventKind.FIXATION, t, t + d, centroid_x=cx, centroid_y=0.0)
        events.append(fix)
        t += d
        events.append(
            GazeEvent(EventKind.SACCADE, t, t + sac_ms, amplitude=float(a))
        )
        t += sac_ms
        cx += a
    events.append(
        GazeEvent(EventKind.FIXATION, t, t + 100.0, centroid_x=cx, centroid_y=0.0)
    )
    return events, t + 100.0


class TestDetectEvents:
    def test_stationary_gaze_single_fixation(self):
        cfg = DetectorConfig(dispersion_threshold=50.0, min_fixation_duration=100.0)
        samples = make_samples(
            [(i * (1000.0 / 29.0), 100.0, 100.0) for i in range(30)]
        )
        events = detect_events(samples, cfg)
        assert len(events) == 1
        fix = events[0]
        assert fix.kind is EventKind.FIXATION
        assert fix.duration == pytest.approx(1000.0)
        assert fix.centroid_x == pytest.approx(100.0)
        assert fix.centroid_y == pytest.approx(100.0)

    def test_two_clusters_one_saccade(self):
        cfg = DetectorConfig(dispersion_threshold=50.0, min_fixation_duration=100.0)
        pts = [(t, 100.0, 100.0) for t in range(0, 401, 25)]
        pts += [(t, 500.0, 500.0) for t in range(450, 901, 25)]
        events = detect_events(make_samples(pts), cfg)
        kinds = [e.kind for e in events]
        assert kinds == [EventKind.FIXATION, EventKind.SACCADE, EventKind.FIXATION]
        sac = events[1]
        assert sac.amplitude == pytest.approx(math.sqrt(400.0**2 + 400.0**2))
        assert sac.t_start == pytest.approx(400.0)
        assert sac.t_end == pytest.approx(450.0)

    def test_constant_motion_yields_nothing(self):
        cfg = DetectorConfig(dispersion_threshold=50.0, min_fixation_duration=100.0)
        pts = [(i * 33.0, 200.0 * i, 0.0) for i in range(40)]
        assert detect_events(make_samples(pts), cfg) == []

    def test_empty_input(self):
        assert detect_events([], DetectorConfig()) == []

    def test_non_monotonic_raises(self):
        pts = [(0.0, 0, 0), (50.0, 0, 0), (20.0, 0, 0)]
        with pytest.raises(OrderingError):
            detect_events(make_samples(pts), DetectorConfig())

    def test_invalid_gap_tolerated_within_max_gap(self):
        cfg = DetectorConfig(
            dispersion_threshold=50.0, min_fixation_duration=100.0, max_gap=80.0
        )
        samples = make_samples([(t, 100.0, 100.0) for t in range(0, 501, 25)])
        # knock out two interior samples -> 75 ms gap between valid neighbours
        broken = []
        for s in samples:
            if s.t_origin in (250.0, 275.0):
                s = GazeSample(
                    s.user_id, s.seq, s.t_origin, 1e9, 1e9, s.pupil_diameter,
                    s.confidence, valid=False,
                )
            broken.append(s)
        events = detect_events(broken, cfg)
        assert len(events) == 1
        assert events[0].duration == pytest.approx(500.0)

    def test_long_invalid_gap_splits_runs(self):
        cfg = DetectorConfig(
            dispersion_threshold=50.0, min_fixation_duration=100.0, max_gap=75.0
        )
        pts = [(t, 100.0, 100.0) for t in range(0, 201, 25)]
        pts += [(t, 100.0, 100.0) for t in range(400, 601, 25)]
        events = detect_events(make_samples(pts), cfg)
        assert [e.kind for e in events] == [
            EventKind.FIXATION,
            EventKind.SACCADE,
            EventKind.FIXATION,
        ]
        # same centroid -> zero-amplitude saccade across the dropout
        assert events[1].amplitude == pytest.approx(0.0)

    def test_deterministic_and_idempotent(self):
        rng = random.Random(7)
        pts = []
        t = 0.0
        for _ in range(200):
            pts.append((t, rng.uniform(0, 1900), rng.uniform(0, 1000)))
            t += 1000.0 / 30.0
        samples = make_samples(pts)
        cfg = DetectorConfig()
        assert detect_events(samples, cfg) == detect_events(samples, cfg)

    def test_alternation_property(self):
        rng = random.Random(11)
        for trial in range(20):
            pts = []
            t = 0.0
            x, y = 500.0, 500.0
            for _ in range(30):
                dwell = rng.uniform(80, 400)
                end = t + dwell
                while t < end:
                    pts.append((t, x + rng.uniform(-5, 5), y + rng.uniform(-5, 5)))
                    t += 1000.0 / 30.0
                x = rng.uniform(50, 1800)
                y = rng.uniform(50, 1000)
            events = detect_events(make_samples(pts), DetectorConfig())
            for a, b in zip(events, events[1:]):
                assert a.kind is not b.kind
            if events:
                assert events[0].kind is EventKind.FIXATION
                assert events[-1].kind is EventKind.FIXATION


def brute_force_window_k(pairs):
    """Independent transcription of the windowed coefficient for a pair list."""
    if len(pairs) < 2:
        return None
    ds = [p[0] for p in pairs]
    as_ = [p[1] for p in pairs]
    mu_d, mu_a = statistics.fmean(ds), statistics.fmean(as_)
    sd_d, sd_a = statistics.pstdev(ds), statistics.pstdev(as_)
    ks = []
    for d, a in pairs:
        zd = 0.0 if sd_d == 0 else (d - mu_d) / sd_d
        za = 0.0 if sd_a == 0 else (a - mu_a) / sd_a
        ks.append(zd - za)
    return statistics.fmean(ks)


class TestWindowK:
    def test_all_equal_pairs_give_zero(self):
        events, end = events_from_pairs([(200.0, 40.0), (200.0, 40.0), (200.0, 40.0)])
        kv = window_k(events, 0.0, end + 1)
        assert kv is not None
        assert kv.value == 0.0
        assert kv.n_pairs == 3

    def test_hand_example(self):
        # pairs (100, 10) and (300, 50): both z-differences cancel exactly
        events, end = events_from_pairs([(100.0, 10.0), (300.0, 50.0), (200.0, 30.0)])
        # drop the trailing saccade+fixation so only two pairs close in-window
        kv = window_k(events, 0.0, events[3].t_end + 1.0)
        assert kv is not None
        assert kv.n_pairs == 2
        assert kv.value == pytest.approx(0.0, abs=1e-12)

    def test_single_pair_absent(self):
        events, _ = events_from_pairs([(100.0, 10.0)])
        # window covering just the first fixation+saccade: one pair
        assert window_k(events, 0.0, events[1].t_end + 1.0) is None

    def test_empty_window_absent(self):
        events, _ = events_from_pairs([(100.0, 10.0), (200.0, 20.0)])
        assert window_k(events, 1e6, 2e6) is None

    def test_unordered_events_raise(self):
        events, end = events_from_pairs([(100.0, 10.0), (200.0, 20.0)])
        with pytest.raises(OrderingError):
            window_k(list(reversed(events)), 0.0, end)

    def test_matches_brute_force_on_random_windows(self):
        rng = random.Random(1234)
        for _ in range(300):
            n = rng.randint(2, 40)
            pairs = [
                (rng.uniform(50, 1500), rng.uniform(1, 1000)) for _ in range(n)
            ]
            events, end = events_from_pairs(pairs)
            kv = window_k(events, 0.0, end + 1.0)
            oracle = brute_force_window_k(pairs)
            assert kv is not None
            assert abs(kv.value - oracle) <= 1e-9

    def test_scale_invariance(self):
        rng = random.Random(99)
        for _ in range(50):
            n = rng.randint(3, 20)
            pairs = [(rng.uniform(50, 1500), rng.uniform(1, 1000)) for _ in range(n)]
            alpha, beta = rng.uniform(0.01, 100), rng.uniform(0.01, 100)
            scaled = [(d * alpha, a * beta) for d, a in pairs]
            ev1, end1 = events_from_pairs(pairs)
            ev2, end2 = events_from_pairs(scaled)
            k1 = window_k(ev1, 0.0, end1 + 1.0)
            k2 = window_k(ev2, 0.0, end2 + 1.0)
            assert abs(k1.value - k2.value) <= 1e-9

    def test_pair_membership_requires_both_ends_inside(self):
        events, end = events_from_pairs([(100.0, 10.0), (200.0, 20.0), (150.0, 30.0)])
        # window starting after the first fixation's end excludes its pair
        first_fix_end = events[0].t_end
        kv = window_k(events, first_fix_end + 1.0, end + 1.0)
        assert kv is not None
        assert kv.n_pairs == 2


class TestAggregates:
    def test_experiment_k_means(self):
        vals = [KValue(1000.0, -0.1, 3, "a"), KValue(2000.0, 0.3, 4, "a")]
        out = experiment_k(vals)
        assert out.value == pytest.approx(0.1)
        vals = [
            KValue(1.0, 0.2, 2, "a"),
            KValue(2.0, -0.4, 2, "a"),
            KValue(3.0, 0.5, 2, "a"),
        ]
        assert experiment_k(vals).value == pytest.approx(0.1)
        assert experiment_k([KValue(1.0, 0.42, 2, "a")]).value == pytest.approx(0.42)

    def test_experiment_k_empty_absent(self):
        assert experiment_k([]) is None

    def test_group_k_means(self):
        vals = [KValue(1.0, 0.4, 2, "A"), KValue(1.0, 0.4, 2, "B")]
        assert group_k(vals).value == pytest.approx(0.4)
        vals = [KValue(1.0, -1.0, 2, "A"), KValue(1.0, 1.0, 2, "B")]
        assert group_k(vals).value == pytest.approx(0.0)
        vals = [
            KValue(1.0, -0.2, 2, "A"),
            KValue(1.0, 0.5, 2, "B"),
            KValue(1.0, 0.3, 2, "C"),
        ]
        assert group_k(vals).value == pytest.approx(0.2)

    def test_group_k_duplicate_user_rejected(self):
        vals = [KValue(1.0, 0.1, 2, "A"), KValue(1.0, 0.2, 2, "A")]
        with pytest.raises(ValueError):
            group_k(vals)

    def test_group_k_empty_absent(self):
        assert group_k([]) is None

    def test_group_k_permutation_invariant(self):
        rng = random.Random(5)
        vals = [
            KValue(1.0, rng.uniform(-2, 2), 2, f"u{i}") for i in range(8)
        ]
        base = group_k(vals).value
        for _ in range(10):
            shuffled = vals[:]
            rng.shuffle(shuffled)
            assert group_k(shuffled).value == pytest.approx(base, abs=1e-12)


class TestTraditional:
    def test_basic_means(self):
        events = [
            GazeEvent(EventKind.FIXATION, 0.0, 100.0, 10.0, 10.0),
            GazeEvent(EventKind.SACCADE, 100.0, 120.0, amplitude=50.0),
            GazeEvent(EventKind.FIXATION, 120.0, 420.0, 60.0, 10.0),
        ]
        tm = traditional_measures(events, 0.0, 1000.0)
        assert tm.mean_fixation_ms == pytest.approx(200.0)
        assert tm.mean_saccade_ms == pytest.approx(20.0)
        assert tm.mean_saccade_px == pytest.approx(50.0)

    def test_window_without_saccades(self):
        events = [GazeEvent(EventKind.FIXATION, 0.0, 150.0, 5.0, 5.0)]
        tm = traditional_measures(events, 0.0, 1000.0)
        assert tm.mean_fixation_ms == pytest.approx(150.0)
        assert tm.mean_saccade_ms is None
        assert tm.mean_saccade_px is None

    def test_empty_window(self):
        events = [GazeEvent(EventKind.FIXATION, 0.0, 150.0, 5.0, 5.0)]
        tm = traditional_measures(events, 5000.0, 6000.0)
        assert tm.is_empty()
        assert tm.as_dict() == {}
