import numpy as np
import pytest

import cellforest as cf


def small_config(seed=1):
    c = cf.SimConfig()
    c.n_clones = 2
    c.frames = 24
    c.width = c.height = 80
    c.seed = seed
    return c


def test_clean_simulation_needs_no_correction():
    sim = cf.simulate(small_config())
    result = cf.correct(sim.movie)
    assert result.committed == 0
    cmp = cf.compare_to_truth(result.forest, result.movie, sim.truth, sim.movie)
    assert cmp.f1 == 1.0


def test_movie_array_round_trip():
    sim = cf.simulate(small_config())
    labels = sim.movie.labels()
    assert labels.shape == (24, 80, 80)
    assert labels.dtype == np.uint32
    assert cf.Movie(labels) == sim.movie
    assert set(np.unique(labels[0])) == {0, 1, 2}


def test_correction_improves_validity():
    sim = cf.simulate(small_config(3))
    bad = cf.inject_errors(sim.movie, sim.truth, cf.ErrorConfig(p_over=0.05, p_over_persistent=0.1, seed=3))
    before = cf.validity(cf.track(bad).forest)
    after = cf.correct(bad)
    assert cf.validity(after.forest).valid_fraction >= before.valid_fraction
    assert after.events_tsv().startswith("frame_from\tframe_to\tkind")
    assert {e.kind for e in after.events} <= {
        "coalesce_to_one", "coalesce_to_division", "underseg_split", "retro_merge", "unresolved"}


def test_match_frame_pair_breaks_ties_to_lower_label():
    prev = np.array([[1, 1, 2, 2]], dtype=np.uint32)
    curr = np.array([[0, 3, 3, 0]], dtype=np.uint32)
    assert cf.match_frame_pair(prev, curr) == [(1, 3, 1)]


def test_forest_exports_and_queries():
    sim = cf.simulate(small_config())
    forest = sim.truth
    assert [tuple(k) for k in forest.roots()] == [(0, 1), (0, 2)]
    assert forest.clone_id(0, 2) == 2
    assert forest.status(0, 1) == "root"
    assert forest.to_dot().startswith("digraph lineage {")
    back = cf.LineageForest.from_tsv(forest.to_tsv())
    assert back.to_tsv() == forest.to_tsv()


def test_files_round_trip(tmp_path):
    sim = cf.simulate(small_config())
    cf.write_movie(sim.movie, tmp_path / "m")
    assert cf.read_movie(tmp_path / "m") == sim.movie


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        cf.AnalysisParams(max_sweeps=0)
    with pytest.raises(ValueError):
        cf.SimConfig({"no_such_key": 1})
    with pytest.raises(ValueError):
        cf.Movie(np.zeros((4, 4), dtype=np.uint32))
    with pytest.raises(ValueError):
        cf.simulate(small_config()).truth.clone_id(0, 99)


def test_config_dict_round_trip():
    c = cf.SimConfig({"n_clones": 3, "seed": 7})
    assert c.n_clones == 3
    assert c.to_dict()["seed"] == 7
