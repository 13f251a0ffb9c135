import pytest
from hypothesis import given
from hypothesis import strategies as st

from qtrigger.errors import IllegalTransition
from qtrigger.snare import (
    PRIMING,
    REGULATED_HAPPY_PATH,
    Event,
    EventKind as E,
    Mode,
    Phase,
    SnareState,
    apply_event,
    check_properties,
    clamp_consistent,
    consistency_violations,
    cycle_closes,
    deadlock_free,
    enumerate_paths,
    fusion_requires_gate,
    initial_state,
    legal_events,
    pore_outcomes_exclusive,
    read_trace,
    run_trace,
    ungated_fusion_witness,
    write_trace,
)


@pytest.mark.parametrize("mode", list(Mode))
def test_initial_state(mode):
    s = initial_state(mode)
    assert s.phase is Phase.CisComplex
    assert not (s.ca_bound or s.atp_hydrolyzed or s.rab_gtp or s.syt_clamped)


def primed(mode=Mode.Regulated):
    return run_trace(PRIMING, mode).final


def test_primed_docked_allows_only_calcium():
    s = primed()
    assert s.phase is Phase.Docked and s.primed
    assert legal_events(s, Mode.Regulated) == {E.CaInflux}


def test_docked_before_gtp_hydrolysis():
    s = run_trace(PRIMING[:5]).final
    assert legal_events(s) == {E.GtpHydrolysis}


def test_constitutive_docked_fuses_directly():
    s = run_trace(PRIMING[:5], Mode.Constitutive).final
    assert s.phase is Phase.Docked
    assert legal_events(s, Mode.Constitutive) == {E.Fuse}


@pytest.mark.parametrize("mode", list(Mode))
def test_pore_open_branches(mode):
    s = SnareState(Phase.FusedPoreOpen, ca_bound=True, atp_hydrolyzed=True)
    assert legal_events(s, mode) == {E.PoreDilate, E.PoreClose}


def test_transition_table():
    expected = {
        Phase.CisComplex: {E.NsfAtpBind},
        Phase.Particle20S: {E.AtpHydrolysis},
        Phase.UnfoldedTransitional: {E.MasterBind},
        Phase.MasterBound: {E.RabGtpBind},
        Phase.RabEngaged: {E.Dock},
        Phase.CalciumTriggered: {E.GateFire, E.GateBlock},
        Phase.SytDetached: {E.Fuse},
        Phase.PoreDilated: {E.Recycle},
        Phase.KissAndRunClosed: {E.Recycle},
        Phase.RecycledCis: {E.NsfAtpBind},
    }
    report = enumerate_paths(14, Mode.Regulated)
    for path in report.paths:
        s = path.states[-1]
        if s.phase in expected:
            assert legal_events(s) == expected[s.phase]


def test_calcium_influx():
    s = apply_event(primed(), E.CaInflux)
    assert s.phase is Phase.CalciumTriggered and s.ca_bound


def test_regulated_direct_fusion_illegal():
    with pytest.raises(IllegalTransition) as info:
        apply_event(primed(), E.Fuse)
    assert info.value.event == "Fuse"


def test_gate_fire_detaches():
    s = apply_event(apply_event(primed(), E.CaInflux), Event(E.GateFire, 0.1))
    assert s.phase is Phase.SytDetached and not s.syt_clamped and s.ca_bound


def test_gate_block_resets():
    s = apply_event(apply_event(primed(), E.CaInflux), E.GateBlock)
    assert s.phase is Phase.Docked and s.syt_clamped and not s.ca_bound


def test_happy_path():
    res = run_trace(REGULATED_HAPPY_PATH)
    assert res.final.phase is Phase.RecycledCis
    assert len(res.visited) == len(REGULATED_HAPPY_PATH) + 1


def test_blocked_path_then_fuse_illegal():
    events = list(REGULATED_HAPPY_PATH[:7]) + [E.GateBlock]
    assert run_trace(events).final.phase is Phase.Docked
    with pytest.raises(IllegalTransition) as info:
        run_trace(events + [E.Fuse])
    assert info.value.index == 8


def test_kiss_and_run():
    events = list(REGULATED_HAPPY_PATH[:9]) + [E.PoreClose, E.Recycle]
    res = run_trace(events)
    assert res.final.phase is Phase.RecycledCis
    assert Phase.PoreDilated not in {s.phase for s in res.visited}
    assert Phase.KissAndRunClosed in {s.phase for s in res.visited}


def test_trace_text_roundtrip():
    text = "# comment\n" + write_trace(REGULATED_HAPPY_PATH) + "\n"
    assert read_trace(text) == list(REGULATED_HAPPY_PATH)
    with pytest.raises(ValueError, match="line 2"):
        read_trace("Dock\nDance\n")


def test_string_events_accepted():
    assert run_trace([e.value for e in REGULATED_HAPPY_PATH]).final.phase is Phase.RecycledCis


def test_regulated_fusion_ordering_depth12():
    report = enumerate_paths(12, Mode.Regulated)
    fused = [p for p in report.paths if p.terminal in (Phase.FusedPoreOpen, Phase.PoreDilated)]
    assert fused
    for p in fused:
        ev = list(p.events)
        i_ca, i_gate, i_fuse = ev.index(E.CaInflux), ev.index(E.GateFire), ev.index(E.Fuse)
        assert i_ca < i_gate < i_fuse


def test_constitutive_fusion_without_calcium():
    w = ungated_fusion_witness(enumerate_paths(8, Mode.Constitutive))
    assert w is not None and E.CaInflux not in w.events


def test_depth_zero():
    report = enumerate_paths(0)
    assert len(report.paths) == 1 and report.paths[0].events == ()
    assert set(report.reachable) == {Phase.CisComplex}


def test_depth_limit():
    with pytest.raises(ValueError):
        enumerate_paths(17)


@pytest.mark.parametrize("mode", list(Mode))
def test_exhaustive_properties_depth16(mode):
    report = enumerate_paths(16, mode)
    if mode is Mode.Regulated:
        assert fusion_requires_gate(report)
    assert deadlock_free(report)
    assert clamp_consistent(report)
    assert cycle_closes(report)
    assert pore_outcomes_exclusive(report)


def test_check_properties_all_hold():
    assert all(check_properties(16).values())


def test_report_format():
    text = enumerate_paths(6).format()
    assert text.startswith("mode: Regulated\nmax_len: 6\n")
    assert "Docked\t5\tNsfAtpBind AtpHydrolysis MasterBind RabGtpBind Dock" in text
    assert "RecycledCis\tunreachable\t-" in text


@given(
    choices=st.lists(st.integers(0, 12), max_size=40),
    mode=st.sampled_from(list(Mode)),
)
def test_random_walks_stay_consistent_and_deterministic(choices, mode):
    s = initial_state(mode)
    events = []
    for c in choices:
        legal = sorted(legal_events(s, mode), key=lambda k: k.value)
        assert legal, "deadlock"
        e = legal[c % len(legal)]
        events.append(e)
        s = apply_event(s, e, mode)
        assert consistency_violations(s) == []
    assert run_trace(events, mode).final == s
    assert run_trace(events, mode).visited == run_trace(events, mode).visited


@given(events=st.lists(st.sampled_from(list(E)), max_size=20), mode=st.sampled_from(list(Mode)))
def test_illegal_events_always_raise(events, mode):
    s = initial_state(mode)
    for e in events:
        if e in legal_events(s, mode):
            s = apply_event(s, e, mode)
        else:
            with pytest.raises(IllegalTransition):
                apply_event(s, e, mode)
