import json

import pytest

from lapa import synth
from lapa.errors import ConfigError
from lapa.ingest import load_corpus, parse_psychometrics
from lapa.models.participant import Division


class TestSimulate:
    def test_simulate__same_seed_same_corpus(self, bundled_catalog):
        config = synth.SynthConfig(n_participants=5, seed=7)

        assert synth.simulate(config, bundled_catalog) == synth.simulate(config, bundled_catalog)

    def test_simulate__different_seed(self, bundled_catalog):
        first = synth.simulate(synth.SynthConfig(n_participants=5, seed=1), bundled_catalog)
        second = synth.simulate(synth.SynthConfig(n_participants=5, seed=2), bundled_catalog)

        assert first != second

    def test_simulate__ids_and_ordering(self, bundled_catalog):
        participants = synth.simulate(synth.SynthConfig(n_participants=3), bundled_catalog)

        assert [p.participant_id for p in participants] == ["p001", "p002", "p003"]
        for participant in participants:
            timestamps = [entry.timestamp for entry in participant.note.entries]
            assert timestamps == sorted(timestamps)

    def test_simulate__restricted_techniques(self, bundled_catalog):
        config = synth.SynthConfig(n_participants=10, techniques=["Create Account"], noise_sd=0.0)

        participants = synth.simulate(config, bundled_catalog)

        names = {name for p in participants for _, name in p.persistence_techniques}
        assert names == {"Create Account"}

    def test_simulate__noise_free_counts_follow_the_model(self, bundled_catalog):
        config = synth.SynthConfig(n_participants=10, noise_sd=0.0)

        for participant in synth.simulate(config, bundled_catalog):
            assert participant.persistence_count == synth.planted_count(
                config, participant.grips, participant.division, 0.0
            )

    @pytest.mark.parametrize(
        "overrides",
        [
            {"n_participants": 0},
            {"noise_sd": -1.0},
            {"entries_per_participant": (5, 2)},
            {"open_probability": 1.5},
            {"techniques": ["Not A Technique"]},
        ],
    )
    def test_simulate__invalid_config(self, bundled_catalog, overrides):
        with pytest.raises(ConfigError):
            synth.simulate(synth.SynthConfig(**overrides), bundled_catalog)


@pytest.mark.parametrize(
    "grips, division, noise, expected",
    [
        (1.0, Division.EXPERT, 0.0, 21),
        (1.0, Division.OPEN, 0.0, 16),
        (5.0, Division.OPEN, 0.0, 0),
        (2.0, Division.EXPERT, 1.4, 18),
    ],
)
def test_planted_count(grips, division, noise, expected):
    config = synth.SynthConfig(division_effect=-4.8)

    assert synth.planted_count(config, grips, division, noise) == expected


def test_planted_count__no_division_effect_by_default():
    config = synth.SynthConfig()

    open_count = synth.planted_count(config, 1.0, Division.OPEN, 0.0)

    assert open_count == synth.planted_count(config, 1.0, Division.EXPERT, 0.0)


@pytest.mark.parametrize("seed", range(10))
def test_simulate__fixed_count_without_noise_or_slope(tmp_path, bundled_catalog, seed):
    config = synth.SynthConfig(n_participants=1, seed=seed, noise_sd=0.0, intercept=5.0, grips_slope=0.0)

    output = synth.generate(config, bundled_catalog, tmp_path)

    assert output.participants[0].persistence_count == 5
    assert synth.read_ground_truth_counts(output.ground_truth_path) == {"p001": 5}


def test_generate__files_read_back(tmp_path, bundled_catalog):
    output = synth.generate(synth.SynthConfig(n_participants=4, seed=3), bundled_catalog, tmp_path)

    corpus = load_corpus(output.notes_dir, output.psychometrics_path)
    assert corpus.participant_ids == ["p001", "p002", "p003", "p004"]
    for record, participant in zip(corpus.records, output.participants):
        assert len(record.note.entries) == len(participant.note.entries)
        assert record.participant.division == participant.division
    assert [p.psychometrics.grips for p in parse_psychometrics(output.psychometrics_path)] == [
        p.grips for p in output.participants
    ]


def test_generate__ground_truth(tmp_path, bundled_catalog):
    output = synth.generate(synth.SynthConfig(n_participants=6, seed=11), bundled_catalog, tmp_path)

    counts = synth.read_ground_truth_counts(output.ground_truth_path)

    expected = {p.participant_id: p.persistence_count for p in output.participants if p.persistence_count}
    assert counts == expected
    first = json.loads(output.ground_truth_path.read_text(encoding="utf-8").splitlines()[0])
    assert set(first) == {"participant_id", "entry_index", "timestamp", "technique_id", "technique_name"}
    assert first["technique_id"].startswith("T")


def test_generate__same_seed_byte_identical_files(tmp_path, bundled_catalog):
    config = synth.SynthConfig(n_participants=5, seed=9, division_effect=-4.8)

    first = synth.generate(config, bundled_catalog, tmp_path / "first")
    second = synth.generate(config, bundled_catalog, tmp_path / "second")

    first_files = {p.relative_to(tmp_path / "first"): p.read_bytes() for p in (tmp_path / "first").rglob("*.*")}
    second_files = {p.relative_to(tmp_path / "second"): p.read_bytes() for p in (tmp_path / "second").rglob("*.*")}
    assert len(first_files) == 5 + 2
    assert first_files == second_files
    assert first.participants == second.participants
