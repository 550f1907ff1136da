import numpy as np

from sdae_ivs.dae import DaeModel
from sdae_ivs.data import VariableMask
from sdae_ivs.mlr import MlrModel
from sdae_ivs.numerics import make_rng
from sdae_ivs.serialize import (load_dae, load_mlr, load_stack, save_dae,
                                save_mlr, save_stack)
from sdae_ivs.stack import StackLayer, StackModel

rng = make_rng(99)


def random_stack(top_mask=None, fine_tuned=False):
    mask1 = VariableMask(np.array([1, 0, 1, 1, 1], dtype=bool))
    dae1 = DaeModel(rng.normal(size=(3, 4)), rng.normal(size=3),
                    rng.normal(size=4))
    mask2 = VariableMask(np.array([1, 1, 0], dtype=bool))
    dae2 = DaeModel(rng.normal(size=(2, 2)), rng.normal(size=2),
                    rng.normal(size=2))
    top = MlrModel(rng.normal(size=(3, 2)), rng.normal(size=3))
    return StackModel([StackLayer(mask1, dae1), StackLayer(mask2, dae2)],
                      top, top_mask, fine_tuned)


def test_mlr_round_trip_is_bit_exact(tmp_path):
    model = MlrModel(rng.normal(size=(4, 7)) * 1e-8, rng.normal(size=4) * 1e8)
    path = tmp_path / "m.json"
    save_mlr(path, model)
    loaded = load_mlr(path)
    assert np.array_equal(loaded.weights, model.weights)
    assert np.array_equal(loaded.biases, model.biases)


def test_dae_round_trip_with_mask(tmp_path):
    model = DaeModel(rng.normal(size=(2, 3)), rng.normal(size=2),
                     rng.normal(size=3), "identity")
    mask = VariableMask(np.array([0, 1, 1, 0, 1], dtype=bool))
    path = tmp_path / "d.json"
    save_dae(path, model, mask)
    loaded, loaded_mask = load_dae(path)
    assert np.array_equal(loaded.weights, model.weights)
    assert loaded.decoder_activation == "identity"
    assert loaded_mask == mask


def test_dae_round_trip_without_mask(tmp_path):
    model = DaeModel(np.zeros((1, 1)), np.zeros(1), np.zeros(1))
    path = tmp_path / "d.json"
    save_dae(path, model)
    _, mask = load_dae(path)
    assert mask is None


def test_stack_round_trip(tmp_path):
    top_mask = VariableMask(np.array([1, 0], dtype=bool))
    model = random_stack(top_mask=top_mask, fine_tuned=True)
    path = tmp_path / "s.json"
    save_stack(path, model)
    loaded = load_stack(path)
    assert loaded.fine_tuned
    assert loaded.top_mask == top_mask
    assert len(loaded.layers) == 2
    for got, want in zip(loaded.layers, model.layers):
        assert got.mask == want.mask
        assert np.array_equal(got.dae.weights, want.dae.weights)
        assert np.array_equal(got.dae.encoder_bias, want.dae.encoder_bias)
        assert np.array_equal(got.dae.decoder_bias, want.dae.decoder_bias)
    assert np.array_equal(loaded.top.weights, model.top.weights)
    assert np.array_equal(loaded.top.biases, model.top.biases)


def test_writes_are_byte_identical(tmp_path):
    model = random_stack()
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save_stack(a, model)
    save_stack(b, model)
    assert a.read_bytes() == b.read_bytes()
