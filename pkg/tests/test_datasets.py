import numpy as np
import pytest

from driftlab.core import RngHandle, StreamSchema
from driftlab.datasets import (DESCRIPTORS, SyntheticDriftConfig, abrupt_class_stream,
                               blocked_class_stream, gaussian_concept_schedule,
                               gaussian_drift_stream, gaussian_mean, load_dataset, load_stream,
                               parse_manifest, resolve_dataset, schedule_for)
from driftlab.errors import ConfigError, IntegrityError, ParseError
from driftlab.learners import GaussianNB

TABLE3 = {
    # id: (classes, features, samples, reset N, retrain N)
    "EL": (2, 8, 45312, 60, 50),
    "FC": (8, 54, 581012, 60, 5000),
    "IA": (6, 33, 52848, 60, 500),
    "II": (6, 33, 57018, 60, 500),
    "KS": (4, 10, 1600, 60, 50),
    "LX": (2, 30, 1901, 32, 50),
    "MR": (2, 3600, 4260, 60, 50),
    "NW": (2, 8, 18159, 120, 50),
    "OZ": (2, 72, 2534, 84, 50),
    "RT": (10, 27, 82250, 60, 50),
    "YG": (2, 426, 3300, 60, 50),
}


def test_descriptors_match_table():
    assert set(DESCRIPTORS) == set(TABLE3)
    for id_, row in TABLE3.items():
        d = DESCRIPTORS[id_]
        assert (d.n_classes, d.n_features, d.n_samples, d.reset_n, d.retrain_n) == row


def test_schedule_for():
    assert schedule_for("LX") == (32, 50)
    assert schedule_for("FC") == (60, 5000)
    assert schedule_for("SYN-ABRUPT") == (60, 50)


def _write_ks_like(path, n=1600, drop=0):
    rng = np.random.default_rng(0)
    with open(path, "w") as fh:
        fh.write(",".join(f"f{i}" for i in range(10)) + ",class\n")
        for t in range(n - drop):
            vals = ",".join(f"{v:.5f}" for v in rng.normal(size=10))
            fh.write(f"{vals},{'abcd'[t % 4]}\n")


def test_load_keystroke_shaped_file(tmp_path):
    p = tmp_path / "ks.csv"
    _write_ks_like(p)
    inst, schema = load_stream(p, DESCRIPTORS["KS"])
    assert (len(inst), schema.n_features, schema.n_classes) == (1600, 10, 4)
    assert schema.class_labels == ("a", "b", "c", "d")
    assert [i.t for i in inst[:3]] == [0, 1, 2]


def test_truncated_file_names_counts(tmp_path):
    p = tmp_path / "ks.csv"
    _write_ks_like(p, drop=7)
    with pytest.raises(IntegrityError, match="expected 1600 vs actual 1593"):
        load_stream(p, DESCRIPTORS["KS"])


def test_malformed_row_reports_row(fixtures_dir):
    with pytest.raises(ParseError, match="row 6"):
        load_stream(fixtures_dir / "malformed10.csv")


def test_header_and_first_appearance_labels(fixtures_dir):
    inst, schema = load_stream(fixtures_dir / "tiny.csv")
    assert schema.feature_names == ("f0", "f1", "f2")
    assert schema.class_labels == ("a", "b", "c")
    assert len(inst) == 12


def test_declared_class_order(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("# classes: z,y\n1.0,y\n2.0,z\n")
    inst, schema = load_stream(p)
    assert schema.class_labels == ("z", "y")
    assert [i.y for i in inst] == [1, 0]


def test_semicolon_delimiter(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("1.5;2.5;a\n3.5;4.5;b\n")
    inst, schema = load_stream(p)
    assert schema.n_features == 2 and inst[1].x.tolist() == [3.5, 4.5]


def test_label_column_choice_and_error(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("a,1.0,2.0\nb,3.0,4.0\n")
    inst, schema = load_stream(p, label_column=0)
    assert schema.class_labels == ("a", "b") and schema.n_features == 2
    with pytest.raises(ConfigError):
        load_stream(p, label_column=5)


def test_missing_value_rejected(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("1.0,2.0,a\n?,2.0,b\n")
    with pytest.raises(ParseError, match="row 2"):
        load_stream(p)


def test_arff(tmp_path):
    p = tmp_path / "x.arff"
    p.write_text("@relation r\n@attribute a numeric\n@attribute class {UP,DOWN}\n"
                 "@data\n0.5,DOWN\n0.7,UP\n")
    inst, schema = load_stream(p)
    assert schema.class_labels == ("UP", "DOWN")
    assert [i.y for i in inst] == [1, 0]


def test_loader_idempotent(fixtures_dir):
    a, _ = load_stream(fixtures_dir / "tiny.csv")
    b, _ = load_stream(fixtures_dir / "tiny.csv")
    assert a == b


def test_manifest_and_resolve(tmp_path):
    _write_ks_like(tmp_path / "ks.csv")
    m = tmp_path / "manifest.txt"
    m.write_text("# comment\nKS ks.csv -1 - -\nEL elec.csv -1 - -\n")
    entries = parse_manifest(m)
    assert [e.id for e in entries] == ["KS", "EL"] and entries[0].sha256 is None
    inst, _ = resolve_dataset("KS", tmp_path, entries)
    assert len(inst) == 1600
    with pytest.raises(FileNotFoundError, match="elec.csv"):
        resolve_dataset("EL", tmp_path, entries)
    m.write_text("KS ks.csv -1 " + "0" * 64 + " -\n")
    with pytest.raises(IntegrityError, match="sha256"):
        resolve_dataset("KS", tmp_path, parse_manifest(m))


def test_manifest_bad_line(tmp_path):
    m = tmp_path / "manifest.txt"
    m.write_text("KS ks.csv\n")
    with pytest.raises(ParseError):
        parse_manifest(m)


def test_gaussian_mean_schedule():
    assert np.all(gaussian_mean(np.arange(10)) == 0)
    assert gaussian_mean(50) == 5
    assert gaussian_mean(55) == 5
    assert gaussian_mean(55, schedule="ramp") == 5.5


def test_stationary_mean_near_zero():
    cfg = SyntheticDriftConfig(10_000, drift_kind="stationary", rng=RngHandle(3))
    x = np.array([i.x[0] for i in gaussian_drift_stream(cfg)])
    assert abs(x.mean()) < 0.05


def test_gaussian_stream_deterministic():
    a = gaussian_drift_stream(SyntheticDriftConfig(50, rng=RngHandle(9)))
    b = gaussian_drift_stream(SyntheticDriftConfig(50, rng=RngHandle(9)))
    assert a == b


def test_class_swap_kind_rejected():
    with pytest.raises(ConfigError):
        gaussian_drift_stream(SyntheticDriftConfig(10, drift_kind="abrupt_class_swap"))


def test_concept_schedule_eleven_concepts():
    sched = gaussian_concept_schedule(SyntheticDriftConfig(101))
    assert len(sched) == 11
    assert all(end - start == 10 for _, start, end, _ in sched[:10])
    assert sched[-1][1:3] == (100, 101)


def test_abrupt_swap_breaks_frozen_nb():
    st = abrupt_class_stream(2000, 1000, RngHandle(4))
    schema = StreamSchema.anonymous(2, 2)
    nb = GaussianNB(schema)
    for inst in st[:1000]:
        nb.learn_one(inst.x, inst.y)
    acc = np.mean([nb.predict_one(i.x)[0] == i.y for i in st[1000:]])
    assert acc < 0.5


def test_abrupt_boundary_and_determinism():
    st = abrupt_class_stream(10, 9, RngHandle(1))
    assert len([i for i in st if i.t >= 9]) == 1
    assert st == abrupt_class_stream(10, 9, RngHandle(1))
    with pytest.raises(ConfigError):
        abrupt_class_stream(10, 10, RngHandle(1))


def test_blocked_stream_labels_cycle():
    st = blocked_class_stream(5, 4, 3, RngHandle(0))
    assert [i.y for i in st] == [0, 1, 2, 3] * 5


def test_load_dataset_synthetic_pure():
    a, sa = load_dataset("SYN-GAUSS", 5)
    b, sb = load_dataset("SYN-GAUSS", 5)
    assert a == b and sa == sb and sa.n_features == 5
