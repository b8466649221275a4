"""Instrument models: mappings, state machines, and scale-lock fuzzing."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tutti.core import ContextStore, ScaleTable
from tutti.instruments import (
    AirHarpModel,
    Button,
    DrumPadsModel,
    FrameRejected,
    GridPoint,
    HandheldModel,
    HeadbandModel,
    Orientation,
    PadPressure,
    SensorFrame,
    Strip,
    TouchKey,
    TouchSynthModel,
    _tilt_to_value,
)
from tutti.sequencer import StepSequencer

SR = 44100


def store(key=0, scale_id=0):
    return ContextStore(key=key, scale_id=scale_id)


def frame(instrument, payload):
    return SensorFrame(instrument, payload)


def note_ons(events):
    return [e for e in events if e.kind == "note_on"]


def note_offs(events):
    return [e for e in events if e.kind == "note_off"]


class TestTouchSynth:
    def test_key_zero_is_root_at_base_octave(self):
        model = TouchSynthModel(store())
        events = model.process(frame("touch", TouchKey(0, True)), 0)
        assert [e.pitch for e in note_ons(events)] == [48]  # C3
        up = model.process(frame("touch", TouchKey(0, False)), 100)
        assert [e.pitch for e in note_offs(up)] == [48]

    def test_key_seven_is_octave_above_key_zero(self):
        model = TouchSynthModel(store())
        base = note_ons(model.process(frame("touch", TouchKey(0, True)), 0))[0]
        oct_up = note_ons(model.process(frame("touch", TouchKey(7, True)), 0))[0]
        assert oct_up.pitch == base.pitch + 12

    def test_repeat_key_down_is_ignored(self):
        model = TouchSynthModel(store())
        model.process(frame("touch", TouchKey(3, True)), 0)
        again = model.process(frame("touch", TouchKey(3, True)), 10)
        assert again == []

    def test_release_uses_pitch_held_at_press_time(self):
        st_ = store()
        model = TouchSynthModel(st_)
        on = note_ons(model.process(frame("touch", TouchKey(4, True)), 0))[0]
        st_.set_context(key=5, scale_id=3)
        off = note_offs(model.process(frame("touch", TouchKey(4, False)), 50))[0]
        assert off.pitch == on.pitch

    def test_button_zero_cycles_scale(self):
        st_ = store(scale_id=7)
        model = TouchSynthModel(st_)
        model.process(frame("touch", Button(0, True)), 0)
        assert st_.context.scale.id == 0
        model.process(frame("touch", Button(0, False)), 1)  # release: no-op
        assert st_.context.scale.id == 0

    def test_button_one_fires_preset_hook(self):
        calls = []
        model = TouchSynthModel(store(), on_cycle_preset=lambda: calls.append(1))
        model.process(frame("touch", Button(1, True)), 0)
        assert calls == [1]

    def test_out_of_range_key_rejected(self):
        model = TouchSynthModel(store())
        with pytest.raises(FrameRejected):
            model.process(frame("touch", TouchKey(24, True)), 0)

    def test_wrong_payload_rejected(self):
        model = TouchSynthModel(store())
        with pytest.raises(FrameRejected):
            model.process(frame("touch", GridPoint(0.5, 0.5)), 0)

    def test_release_all_closes_held_keys(self):
        model = TouchSynthModel(store())
        for k in (0, 5, 11):
            model.process(frame("touch", TouchKey(k, True)), 0)
        offs = model.release_all(100)
        assert len(offs) == 3
        assert all(e.kind == "note_off" for e in offs)


class TestHeadband:
    def orient(self, yaw=0.0, pitch=0.0, roll=0.0):
        return frame("head", Orientation(yaw, pitch, roll))

    def test_center_yaw_plays_root(self):
        model = HeadbandModel(store())
        events = model.process(self.orient(0.0), 0)
        assert note_ons(events)[0].pitch == 60  # degree 0, octave 4

    def test_full_yaw_is_plus_seven_degrees(self):
        model = HeadbandModel(store())
        events = model.process(self.orient(60.0), 0)
        assert note_ons(events)[0].pitch == 72  # one scale octave up

    def test_yaw_beyond_span_clamps(self):
        model = HeadbandModel(store())
        a = note_ons(model.process(self.orient(60.0), 0))[0].pitch
        model2 = HeadbandModel(store())
        b = note_ons(model2.process(self.orient(175.0), 0))[0].pitch
        assert a == b

    def test_degree_change_retriggers(self):
        model = HeadbandModel(store())
        model.process(self.orient(0.0), 0)
        events = model.process(self.orient(20.0), 100)
        assert len(note_offs(events)) == 1
        assert len(note_ons(events)) == 1
        assert note_offs(events)[0].pitch == 60

    def test_degree_is_monotone_step_function_of_yaw(self):
        model = HeadbandModel(store())
        pitches = []
        for i, yaw in enumerate(range(-75, 76)):
            events = model.process(self.orient(float(yaw)), i * 100)
            ons = note_ons(events)
            if ons:
                pitches.append(ons[0].pitch)
        assert pitches == sorted(pitches)
        assert len(set(pitches)) == 15  # degrees -7..+7

    def test_head_pitch_maps_reverb_send(self):
        model = HeadbandModel(store())
        for pitch, want in ((-30.0, 0.0), (0.0, 0.5), (30.0, 1.0), (90.0, 1.0)):
            events = model.process(self.orient(0.0, pitch, 0.0), 0)
            sends = [e for e in events if e.kind == "control"
                     and e.controller == "reverb_send"]
            assert sends[-1].value == pytest.approx(want)

    def test_roll_hysteresis_enumeration(self):
        model = HeadbandModel(store())
        model.process(self.orient(0.0), 0)

        events = model.process(self.orient(0.0, 0.0, 30.0), 1)
        harmony = note_ons(events)
        assert [e.pitch for e in harmony] == [64]  # third above C4

        events = model.process(self.orient(0.0, 0.0, 22.0), 2)
        assert note_ons(events) == [] and note_offs(events) == []

        events = model.process(self.orient(0.0, 0.0, 19.0), 3)
        assert [e.pitch for e in note_offs(events)] == [64]

    def test_negative_roll_also_triggers(self):
        model = HeadbandModel(store())
        model.process(self.orient(0.0), 0)
        events = model.process(self.orient(0.0, 0.0, -28.0), 1)
        assert [e.pitch for e in note_ons(events)] == [64]

    def test_harmony_follows_melody_steps(self):
        model = HeadbandModel(store())
        model.process(self.orient(0.0), 0)
        model.process(self.orient(0.0, 0.0, 30.0), 1)
        events = model.process(self.orient(26.0, 0.0, 30.0), 2)
        # melody stepped: old melody + old harmony off, new melody + harmony on
        assert len(note_offs(events)) == 2
        assert len(note_ons(events)) == 2

    def test_release_all(self):
        model = HeadbandModel(store())
        model.process(self.orient(10.0, 0.0, 40.0), 0)
        offs = model.release_all(100)
        assert len(offs) == 2
        assert model.process(self.orient(10.0, 0.0, 0.0), 200)  # fresh start works


class TestHandheld:
    def orient(self, pitch=0.0, roll=0.0):
        return frame("hand", Orientation(0.0, pitch, roll))

    def test_center_tilt_gives_half(self):
        model = HandheldModel(store())
        events = model.process(self.orient(0.0), 0)
        glide = [e for e in events if e.kind == "pitch_glide"][0]
        assert glide.value == 0.5

    def test_dead_zone_is_flat(self):
        assert _tilt_to_value(2.9) == 0.5
        assert _tilt_to_value(-2.9) == 0.5
        assert _tilt_to_value(3.0) == 0.5

    def test_extremes(self):
        assert _tilt_to_value(45.0) == 1.0
        assert _tilt_to_value(-45.0) == 0.0
        assert _tilt_to_value(80.0) == 1.0  # clamped

    def test_sweep_is_monotone_non_decreasing(self):
        values = [_tilt_to_value(a / 2.0) for a in range(-90, 91)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_roll_maps_cutoff_control(self):
        model = HandheldModel(store())
        events = model.process(self.orient(0.0, 45.0), 0)
        cut = [e for e in events if e.kind == "control" and e.controller == "cutoff"]
        assert cut[0].value == 1.0

    def test_wrong_payload_rejected(self):
        model = HandheldModel(store())
        with pytest.raises(FrameRejected):
            model.process(frame("hand", TouchKey(0, True)), 0)


class TestAirHarp:
    def test_stationary_point_is_silent(self):
        model = AirHarpModel(store())
        first = model.process(frame("harp", GridPoint(0.3, 0.3)), 0)
        assert len(note_ons(first)) == 1
        again = model.process(frame("harp", GridPoint(0.31, 0.31)), 1000)
        assert again == []

    def test_sweep_across_columns_ascends_in_scale(self):
        st_ = store()
        model = AirHarpModel(st_)
        pcs = st_.context.pitch_classes()
        pitches = []
        t = 0
        for col in range(8):
            x = (col + 0.5) / 8.0
            events = model.process(frame("harp", GridPoint(x, 0.1)), t)
            t += int(0.2 * SR)
            pitches.extend(e.pitch for e in note_ons(events))
        assert len(pitches) == 8
        assert pitches == sorted(pitches) and len(set(pitches)) == 8
        assert all(p % 12 in pcs for p in pitches)

    def test_rows_add_octaves(self):
        model = AirHarpModel(store())
        bottom = note_ons(model.process(frame("harp", GridPoint(0.05, 0.1, "a")), 0))[0]
        top = note_ons(model.process(frame("harp", GridPoint(0.05, 0.9, "b")), 0))[0]
        assert top.pitch == bottom.pitch + 24

    def test_auto_note_off_scheduled(self):
        model = AirHarpModel(store())
        events = model.process(frame("harp", GridPoint(0.5, 0.5)), 1000)
        on, off = events
        assert on.kind == "note_on" and off.kind == "note_off"
        assert off.pitch == on.pitch
        assert off.timestamp == 1000 + int(0.4 * SR)

    def test_refractory_timeline(self):
        model = AirHarpModel(store())
        t0 = 0
        t_50ms = int(0.05 * SR)
        t_100ms = int(0.10 * SR)
        t_150ms = int(0.15 * SR)
        assert note_ons(model.process(frame("harp", GridPoint(0.05, 0.1)), t0))
        # hop away, then back inside the refractory window: suppressed
        model.process(frame("harp", GridPoint(0.95, 0.1)), t_50ms - 1)
        assert model.process(frame("harp", GridPoint(0.05, 0.1)), t_50ms) == []
        # hop away, then back after the window: triggers
        model.process(frame("harp", GridPoint(0.95, 0.1)), t_100ms)
        assert note_ons(model.process(frame("harp", GridPoint(0.05, 0.1)), t_150ms))

    def test_out_of_range_rejected(self):
        model = AirHarpModel(store())
        with pytest.raises(FrameRejected):
            model.process(frame("harp", GridPoint(1.2, 0.5)), 0)
        with pytest.raises(FrameRejected):
            model.process(frame("harp", GridPoint(0.5, -0.1)), 0)

    def test_body_points_track_independently(self):
        model = AirHarpModel(store())
        a = model.process(frame("harp", GridPoint(0.05, 0.1, "left")), 0)
        assert note_ons(a)
        # other point entering the same cell within refractory: suppressed
        b = model.process(frame("harp", GridPoint(0.05, 0.1, "right")), 100)
        assert b == []
        # but its own next cell is free
        c = model.process(frame("harp", GridPoint(0.55, 0.1, "right")), 200)
        assert note_ons(c)

    @given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1),
                              st.integers(0, 2000)), min_size=2, max_size=60))
    @settings(max_examples=150, deadline=None)
    def test_no_cell_retriggers_inside_refractory(self, moves):
        model = AirHarpModel(store())
        window = int(0.12 * SR)
        last_on: dict[tuple[int, int], int] = {}
        now = 0
        for x, y, dt in moves:
            now += dt
            events = model.process(frame("harp", GridPoint(x, y)), now)
            if note_ons(events):
                cell = (min(int(x * 8), 7), min(int(y * 3), 2))
                if cell in last_on:
                    assert now - last_on[cell] >= window
                last_on[cell] = now


class TestDrumPads:
    def make(self):
        st_ = store()
        seq = StepSequencer(st_, SR)
        return DrumPadsModel(st_, seq, SR), seq

    def test_immediate_hit_emits_cutoff_then_note(self):
        model, _ = self.make()
        events = model.process(frame("drums", PadPressure(3, 0.7)), 0)
        assert [e.kind for e in events] == ["control", "note_on"]
        assert events[0].controller == "cutoff"
        assert events[0].value == pytest.approx(0.7)
        assert events[1].pitch == 3

    def test_dry_mode_skips_cutoff(self):
        model, seq = self.make()
        seq.toggle_dry_wet()
        events = model.process(frame("drums", PadPressure(0, 0.9)), 0)
        assert [e.kind for e in events] == ["note_on"]

    def test_record_mode_writes_step(self):
        model, seq = self.make()
        model.process(frame("drums", Button(1, True)), 0)  # record on
        events = model.process(frame("drums", PadPressure(2, 0.4)), 0)
        assert events == []
        assert seq.pattern.tracks[2][0].active

    def test_strip_sets_tempo(self):
        model, seq = self.make()
        model.process(frame("drums", Strip(0.5)), 0)
        assert seq.context.context.tempo_bpm == 120.0

    def test_button_zero_toggles_wet(self):
        model, seq = self.make()
        assert seq.wet
        model.process(frame("drums", Button(0, True)), 0)
        assert not seq.wet

    def test_button_two_toggles_transport(self):
        model, seq = self.make()
        model.process(frame("drums", Button(2, True)), 0)
        assert seq.playing
        model.process(frame("drums", Button(2, True)), 1)
        assert not seq.playing

    def test_bad_pad_rejected(self):
        model, _ = self.make()
        with pytest.raises(FrameRejected):
            model.process(frame("drums", PadPressure(4, 0.5)), 0)


class TestOrientationNormalization:
    def test_angles_wrap_into_range(self):
        o = Orientation(270.0, -200.0, 540.0)
        assert o.yaw == -90.0
        assert o.pitch == 160.0
        assert o.roll == -180.0  # 540 wraps to the -180 end of the range


def random_touch_frames(rng, count):
    for _ in range(count):
        if rng.random() < 0.9:
            yield TouchKey(rng.randrange(24), rng.random() < 0.6)
        else:
            yield Button(rng.randrange(2), True)


def random_head_frames(rng, count):
    for _ in range(count):
        yield Orientation(rng.uniform(-90, 90), rng.uniform(-40, 40),
                          rng.uniform(-40, 40))


def random_harp_frames(rng, count):
    for _ in range(count):
        yield GridPoint(rng.random(), rng.random(), f"p{rng.randrange(3)}")


class TestScaleLockFuzz:
    """Small fuzz here; the full per-scale sweep runs in the acceptance suite."""

    def test_models_emit_only_in_scale_pitches(self):
        rng = random.Random(1234)
        for scale in ScaleTable():
            key = rng.randrange(12)
            st_ = store(key=key, scale_id=scale.id)
            models = [TouchSynthModel(st_), HeadbandModel(st_), AirHarpModel(st_)]
            gens = [random_touch_frames(rng, 300), random_head_frames(rng, 300),
                    random_harp_frames(rng, 300)]
            now = 0
            for model, gen in zip(models, gens):
                for payload in gen:
                    now += rng.randrange(2000)
                    pcs = st_.context.pitch_classes()
                    for e in model.process(frame(model.source, payload), now):
                        if e.kind == "note_on":
                            assert e.pitch % 12 in pcs

    def test_note_pairing_after_release_all(self):
        rng = random.Random(99)
        st_ = store()
        for model_cls in (TouchSynthModel, HeadbandModel, AirHarpModel):
            model = model_cls(st_)
            gen = {
                TouchSynthModel: random_touch_frames,
                HeadbandModel: random_head_frames,
                AirHarpModel: random_harp_frames,
            }[model_cls](rng, 400)
            events = []
            now = 0
            for payload in gen:
                now += rng.randrange(3000)
                events.extend(model.process(frame(model.source, payload), now))
            events.extend(model.release_all(now + 1))
            balance: dict[int, int] = {}
            for e in events:
                if e.kind == "note_on":
                    balance[e.pitch] = balance.get(e.pitch, 0) + 1
                elif e.kind == "note_off":
                    balance[e.pitch] = balance.get(e.pitch, 0) - 1
            assert all(v == 0 for v in balance.values()), balance
