"""Query composition and block-diagonal mask algebra."""

import numpy as np

from vecdrive.autodiff import Tensor
from vecdrive.config import ModelConfig
from vecdrive.model import (
    build_intra_instance_mask,
    compose_motion_queries,
    compose_queries,
    mask_for_prediction,
)


def test_mask_2x3_block_counts():
    mask = build_intra_instance_mask(2, 3)
    assert mask.allowed.shape == (6, 6)
    assert mask.allowed.sum() == 18
    assert (~mask.allowed).sum() == 18
    assert np.array_equal(mask.allowed[:3, :3], np.ones((3, 3), dtype=bool))
    assert not mask.allowed[:3, 3:].any()


def test_single_instance_mask_is_all_allowed():
    assert build_intra_instance_mask(1, 7).allowed.all()


def test_reference_scale_mask_allowed_count():
    mask = build_intra_instance_mask(100, 20)
    assert mask.q == 2000
    assert mask.allowed.sum() == 100 * 20 ** 2


def test_block_algebra_exhaustive_small_shapes():
    # allowed(i, j) <=> floor(i / bs) == floor(j / bs), all q <= 64.
    for n_inst in range(1, 9):
        for bs in range(1, 9):
            if n_inst * bs > 64:
                continue
            mask = build_intra_instance_mask(n_inst, bs)
            for i in range(mask.q):
                for j in range(mask.q):
                    assert mask.allowed[i, j] == (i // bs == j // bs)


def test_mask_symmetric_and_reflexive(rng):
    for _ in range(20):
        mask = build_intra_instance_mask(int(rng.integers(1, 10)),
                                         int(rng.integers(1, 10)))
        assert np.array_equal(mask.allowed, mask.allowed.T)
        assert mask.allowed.diagonal().all()


def test_compose_queries_row_count_at_reference_scale(rng):
    inst = Tensor(rng.normal(size=(100, 8)))
    pts = Tensor(rng.normal(size=(20, 8)))
    assert compose_queries(inst, pts).shape == (2000, 8)


def test_compose_queries_additive_identity(rng):
    inst = Tensor(rng.normal(size=(1, 5)))
    out = compose_queries(inst, Tensor(np.zeros((1, 5))))
    assert np.array_equal(out.values, inst.values)


def test_compose_queries_unrolled_definition(rng):
    a, b = rng.normal(size=5), rng.normal(size=5)
    p = rng.normal(size=(3, 5))
    out = compose_queries(Tensor(np.stack([a, b])), Tensor(p)).values
    expected = np.stack([a + p[0], a + p[1], a + p[2], b + p[0], b + p[1], b + p[2]])
    assert np.array_equal(out, expected)


def test_compose_queries_is_linear(rng):
    inst = rng.normal(size=(4, 6))
    pts = rng.normal(size=(3, 6))
    alpha = 2.75
    scaled = compose_queries(Tensor(alpha * inst), Tensor(alpha * pts)).values
    base = compose_queries(Tensor(inst), Tensor(pts)).values
    assert np.abs(scaled - alpha * base).max() < 1e-12


def test_compose_queries_permutation_covariance(rng):
    inst = rng.normal(size=(5, 4))
    pts = rng.normal(size=(3, 4))
    perm = rng.permutation(5)
    base = compose_queries(Tensor(inst), Tensor(pts)).values.reshape(5, 3, 4)
    permuted = compose_queries(Tensor(inst[perm]), Tensor(pts)).values.reshape(5, 3, 4)
    assert np.array_equal(permuted, base[perm])


def test_compose_motion_queries_reference_counts(rng):
    out = compose_motion_queries(Tensor(rng.normal(size=(7, 8))),
                                 Tensor(rng.normal(size=(5, 8))),
                                 Tensor(rng.normal(size=(6, 8))))
    assert out.shape == (210, 8)


def test_compose_motion_queries_zero_and_singleton(rng):
    zero = compose_motion_queries(Tensor(np.zeros((2, 4))), Tensor(np.zeros((3, 4))),
                                  Tensor(np.zeros((2, 4))))
    assert not zero.values.any()
    a, m, p = rng.normal(size=(1, 4)), rng.normal(size=(1, 4)), rng.normal(size=(1, 4))
    out = compose_motion_queries(Tensor(a), Tensor(m), Tensor(p))
    assert np.abs(out.values - (a + m + p)).max() < 1e-15


def test_compose_motion_queries_index_layout(rng):
    agent = rng.normal(size=(2, 3))
    mode = rng.normal(size=(2, 3))
    point = rng.normal(size=(2, 3))
    out = compose_motion_queries(Tensor(agent), Tensor(mode), Tensor(point)).values
    for o in range(2):
        for m in range(2):
            for t in range(2):
                row = o * 4 + m * 2 + t
                assert np.array_equal(out[row], agent[o] + mode[m] + point[t])


def test_prediction_mask_defaults():
    cfg = ModelConfig()  # N_I=5, N_P=6
    mask = mask_for_prediction(cfg, 1)
    assert mask.q == 30
    assert mask.n_instances == 5 and mask.block_size == 6
    # Same agent, different modes: blocked.
    assert not mask.allowed[0, 6]
    assert mask.allowed[0, 5]


def test_prediction_mask_block_membership_formula():
    cfg = ModelConfig()
    mask = mask_for_prediction(cfg, 3)
    q = mask.q
    for i in range(0, q, 7):
        for j in range(0, q, 5):
            same_block = (i // cfg.traj_points) == (j // cfg.traj_points)
            assert mask.allowed[i, j] == same_block
