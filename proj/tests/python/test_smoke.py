import math
import os
import subprocess

import pytest

import spikekg


def test_spike_times_example():
    t = spikekg.spike_times([3.0, -4.0])
    assert t == pytest.approx([0.6, 1.4])
    assert spikekg.spike_times([3.0, 4.0], mode="unit", tau_ref=0.5) == pytest.approx([3.0, 7.5])


def test_scores():
    assert spikekg.score("asym", [0.2, 0.5], [0.1, 0.3], [0.1, 0.2]) == pytest.approx(0.0)
    assert spikekg.score("sym", [0.2], [0.5], [-0.3]) == pytest.approx(0.0)


def test_solve_interval():
    assert spikekg.solve_interval([2.0], [0.0]) == pytest.approx(0.5 * math.log(2.0))
    assert spikekg.solve_interval([0.3, 0.3], [0.1, 0.2]) is None


def test_isi_statistics():
    st = spikekg.isi_statistics([[0.0, 1.0, 4.0]])
    assert st["mean"] == pytest.approx(2.0)
    assert st["cv"] == pytest.approx(0.5)
    with pytest.raises(spikekg.NumericalError):
        spikekg.isi_statistics([[0.5]])


def test_dataset():
    kg = spikekg.load_dataset("umls")
    assert kg.num_entities == 135
    assert len(kg.triples("train")) == 5216
    s, p, o = kg.triples("test")[0]
    assert kg.is_known(s, p, o)
    with pytest.raises(spikekg.SpikekgError):
        spikekg.load_dataset("no_such_dataset")


def test_train_save_reload(tmp_path):
    cfg = "dataset = zachary\nmodel = spikte\ndim = 10\ntau_ref = 0.1\nfrozen_relations = interact\n"
    model, log = spikekg.train(cfg, {"max_epochs": 20, "batch_size": 32})
    assert len(log) == 20
    assert log[-1]["train_loss"] <= log[0]["train_loss"]
    train = model.spike_train("1")
    assert len(train) == 10
    assert all(b - a >= 0.1 - 1e-12 for a, b in zip(train, train[1:]))
    path = tmp_path / "zachary.json"
    model.save(str(path))
    back = spikekg.load_checkpoint(str(path))
    assert back.kind == "spikte"
    assert back.score("1", "interact", "34") == model.score("1", "interact", "34")
    with pytest.raises(spikekg.ConfigError):
        spikekg.train(cfg, {"learning_rat": 0.1})


def test_cli_help():
    cli = os.environ.get("SPIKEKG_CLI")
    if not cli:
        pytest.skip("SPIKEKG_CLI not set")
    out = subprocess.run([cli, "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "sweep-length" in out.stdout
