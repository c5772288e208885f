"""The three query-based decoders and the end-to-end forward pass.

Layer recipe (pre-norm residual throughout):

  composed queries -> [query init: masked self-attention] ->
  n_layers x [cross-attention -> masked self-attention -> feed-forward]

Perception and prediction cross-attend the projected BEV tokens; planning
cross-attends the final map queries and then the final motion queries and
never sees the BEV tensor. Trajectory heads emit per-step offsets that are
accumulated from a known anchor (the agent's last observed position, or the
origin for the ego), so a zero head yields a constant-position baseline.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..autodiff import (
    Parameter,
    Tensor,
    add,
    cumsum,
    gather_rows,
    linear,
    mean,
    relu,
    reshape,
)
from ..config import COMMANDS, ModelConfig
from ..errors import ConfigError, ShapeError
from ..scene import BevGrid, command_index, rasterize_bev
from ..scene.types import validate_scene  # noqa: F401  (re-export convenience)
from .attention import (
    AttnParams,
    FFParams,
    NormParams,
    cross_attention_block,
    feed_forward_block,
    self_attention_block,
)
from .queries import (
    build_intra_instance_mask,
    compose_motion_queries,
    compose_queries,
    mask_for_perception,
    mask_for_planning,
    mask_for_prediction,
)

N_BEV_CHANNELS = 5
EMBED_STD = 0.02


@dataclass(frozen=True)
class AblationToggles:
    """Which intra-instance machinery is active.

    ``*_intra=False`` removes a module's query-initialization pass and runs
    its in-layer self-attention unmasked (the plain query-decoder baseline).
    ``masked_self_attention=False`` keeps every added self-attention layer
    but replaces all masks with all-allowed ones.
    """

    perception_intra: bool = True
    prediction_intra: bool = True
    planning_intra: bool = True
    masked_self_attention: bool = True


@dataclass
class ModelOutput:
    map_points: Tensor              # (M_I, M_P, 2)
    map_class_logits: Tensor        # (M_I, classes + 1), last = no-object
    agent_trajectories: Tensor      # (n_agents, N_I, N_P, 2)
    agent_mode_logits: Tensor       # (n_agents, N_I)
    agent_existence_logits: Tensor  # (N_O,)
    ego_trajectories: Tensor        # (K_I, K_P, 2)
    ego_mode_logits: Tensor         # (K_I,)

    def finite(self):
        return all(np.isfinite(getattr(self, f).values).all()
                   for f in ("map_points", "map_class_logits",
                             "agent_trajectories", "agent_mode_logits",
                             "agent_existence_logits", "ego_trajectories",
                             "ego_mode_logits"))


@dataclass
class BatchOutput:
    """Batched decoder outputs plus per-scene slicing into ModelOutput."""

    cfg: ModelConfig
    n_agents: list
    map_points: Tensor              # (B, M_I, M_P, 2)
    map_class_logits: Tensor        # (B, M_I, classes + 1)
    agent_trajectories: Tensor      # (B, N_O, N_I, N_P, 2)
    agent_mode_logits: Tensor       # (B, N_O, N_I)
    agent_existence_logits: Tensor  # (B, N_O)
    ego_trajectories: Tensor        # (B, K_I, K_P, 2)
    ego_mode_logits: Tensor         # (B, K_I)
    map_queries: Tensor
    motion_queries: Tensor

    def scene_output(self, b) -> ModelOutput:
        def pick(t, tail):
            flat = reshape(t, (t.shape[0], -1))
            return reshape(gather_rows(flat, [b]), tail)

        cfg = self.cfg
        n = self.n_agents[b]
        idx = np.arange(n)
        traj_b = pick(self.agent_trajectories,
                      (cfg.agent_queries, cfg.agent_modes * cfg.traj_points * 2))
        agent_traj = reshape(gather_rows(traj_b, idx),
                             (n, cfg.agent_modes, cfg.traj_points, 2))
        agent_modes = gather_rows(
            pick(self.agent_mode_logits, (cfg.agent_queries, cfg.agent_modes)), idx)
        return ModelOutput(
            map_points=pick(self.map_points, (cfg.map_instances, cfg.map_points, 2)),
            map_class_logits=pick(self.map_class_logits,
                                  (cfg.map_instances, cfg.map_classes + 1)),
            agent_trajectories=agent_traj,
            agent_mode_logits=agent_modes,
            agent_existence_logits=pick(self.agent_existence_logits,
                                        (cfg.agent_queries,)),
            ego_trajectories=pick(self.ego_trajectories,
                                  (cfg.ego_modes, cfg.ego_points, 2)),
            ego_mode_logits=pick(self.ego_mode_logits, (cfg.ego_modes,)))


@dataclass
class DecoderLayerParams:
    cross: AttnParams
    self_attn: AttnParams
    ff: FFParams
    norm_cross: NormParams
    norm_self: NormParams
    norm_ff: NormParams


@dataclass
class PlanningLayerParams:
    cross_map: AttnParams
    cross_motion: AttnParams
    self_attn: AttnParams
    ff: FFParams
    norm_map: NormParams
    norm_motion: NormParams
    norm_self: NormParams
    norm_ff: NormParams


class ParamRegistry:
    def __init__(self, seed):
        self.rng = np.random.default_rng(seed)
        self.params = {}

    def _add(self, name, values):
        if name in self.params:
            raise ConfigError(f"duplicate parameter name {name!r}")
        p = Parameter(values, name)
        self.params[name] = p
        return p

    def normal(self, name, shape, std):
        return self._add(name, self.rng.normal(0.0, std, size=shape))

    def zeros(self, name, shape):
        return self._add(name, np.zeros(shape))

    def ones(self, name, shape):
        return self._add(name, np.ones(shape))

    def attn(self, prefix, d):
        s = 1.0 / math.sqrt(d)
        return AttnParams(
            w_q=self.normal(f"{prefix}.w_q", (d, d), s), b_q=self.zeros(f"{prefix}.b_q", (d,)),
            w_k=self.normal(f"{prefix}.w_k", (d, d), s), b_k=self.zeros(f"{prefix}.b_k", (d,)),
            w_v=self.normal(f"{prefix}.w_v", (d, d), s), b_v=self.zeros(f"{prefix}.b_v", (d,)),
            w_o=self.normal(f"{prefix}.w_o", (d, d), s), b_o=self.zeros(f"{prefix}.b_o", (d,)))

    def norm(self, prefix, d):
        return NormParams(gain=self.ones(f"{prefix}.gain", (d,)),
                          bias=self.zeros(f"{prefix}.bias", (d,)))

    def ff(self, prefix, d_in, d_hidden, d_out):
        return FFParams(
            w1=self.normal(f"{prefix}.w1", (d_in, d_hidden), 1.0 / math.sqrt(d_in)),
            b1=self.zeros(f"{prefix}.b1", (d_hidden,)),
            w2=self.normal(f"{prefix}.w2", (d_hidden, d_out), 1.0 / math.sqrt(d_hidden)),
            b2=self.zeros(f"{prefix}.b2", (d_out,)))

    def decoder_layer(self, prefix, d):
        return DecoderLayerParams(
            cross=self.attn(f"{prefix}.cross_attn", d),
            self_attn=self.attn(f"{prefix}.self_attn", d),
            ff=self.ff(f"{prefix}.ff", d, 4 * d, d),
            norm_cross=self.norm(f"{prefix}.norm_cross", d),
            norm_self=self.norm(f"{prefix}.norm_self", d),
            norm_ff=self.norm(f"{prefix}.norm_ff", d))

    def planning_layer(self, prefix, d):
        return PlanningLayerParams(
            cross_map=self.attn(f"{prefix}.cross_map", d),
            cross_motion=self.attn(f"{prefix}.cross_motion", d),
            self_attn=self.attn(f"{prefix}.self_attn", d),
            ff=self.ff(f"{prefix}.ff", d, 4 * d, d),
            norm_map=self.norm(f"{prefix}.norm_map", d),
            norm_motion=self.norm(f"{prefix}.norm_motion", d),
            norm_self=self.norm(f"{prefix}.norm_self", d),
            norm_ff=self.norm(f"{prefix}.norm_ff", d))


@lru_cache(maxsize=8)
def positional_encoding_2d(h, w, d):
    """Fixed sine/cosine encoding of the 2-D cell index, (h*w, d)."""

    def axis_table(n, dims):
        pos = np.arange(n, dtype=np.float64)[:, None]
        idx = np.arange(dims, dtype=np.float64)[None, :]
        angle = pos / np.power(10000.0, 2.0 * np.floor(idx / 2.0) / dims)
        return np.where(idx.astype(int) % 2 == 0, np.sin(angle), np.cos(angle))

    half = d // 2
    tx = axis_table(h, half)
    ty = axis_table(w, d - half)
    grid = np.concatenate([np.repeat(tx[:, None, :], w, axis=1),
                           np.repeat(ty[None, :, :], h, axis=0)], axis=-1)
    return grid.reshape(h * w, d)


class DrivingModel:
    """Parameter container plus the three decoder forward passes."""

    def __init__(self, cfg: ModelConfig, seed=0, toggles=None):
        cfg.validate()
        self.cfg = cfg
        self.toggles = toggles if toggles is not None else AblationToggles()
        reg = ParamRegistry(seed)
        d = cfg.d_model

        self.bev_proj_w = reg.normal("bev_proj.w", (N_BEV_CHANNELS, d),
                                     1.0 / math.sqrt(N_BEV_CHANNELS))
        self.bev_proj_b = reg.zeros("bev_proj.b", (d,))

        self.map_inst_emb = reg.normal("perception.inst_emb", (cfg.map_instances, d), EMBED_STD)
        self.map_point_emb = reg.normal("perception.point_emb", (cfg.map_points, d), EMBED_STD)
        if self.toggles.perception_intra:
            self.perc_init_attn = reg.attn("perception.init_attn", d)
            self.perc_init_norm = reg.norm("perception.init_norm", d)
        self.perc_layers = [reg.decoder_layer(f"perception.layers.{i}", d)
                            for i in range(cfg.n_layers)]
        self.map_point_head = reg.ff("perception.point_head", d, d, 2)
        self.map_class_w = reg.normal("perception.class_head.w",
                                      (d, cfg.map_classes + 1), 1.0 / math.sqrt(d))
        self.map_class_b = reg.zeros("perception.class_head.b", (cfg.map_classes + 1,))

        self.agent_emb = reg.normal("prediction.agent_emb", (cfg.agent_queries, d), EMBED_STD)
        self.mode_emb = reg.normal("prediction.mode_emb", (cfg.agent_modes, d), EMBED_STD)
        self.traj_point_emb = reg.normal("prediction.point_emb", (cfg.traj_points, d), EMBED_STD)
        if self.toggles.prediction_intra:
            self.pred_init_attn = reg.attn("prediction.init_attn", d)
            self.pred_init_norm = reg.norm("prediction.init_norm", d)
        self.pred_layers = [reg.decoder_layer(f"prediction.layers.{i}", d)
                            for i in range(cfg.n_layers)]
        self.pred_point_head = reg.ff("prediction.point_head", d, d, 2)
        self.pred_mode_w = reg.normal("prediction.mode_head.w", (d, 1), 1.0 / math.sqrt(d))
        self.pred_mode_b = reg.zeros("prediction.mode_head.b", (1,))
        self.pred_exist_w = reg.normal("prediction.exist_head.w", (d, 1), 1.0 / math.sqrt(d))
        self.pred_exist_b = reg.zeros("prediction.exist_head.b", (1,))

        self.ego_mode_emb = reg.normal("planning.mode_emb", (cfg.ego_modes, d), EMBED_STD)
        self.ego_point_emb = reg.normal("planning.point_emb", (cfg.ego_points, d), EMBED_STD)
        self.command_emb = reg.normal("planning.command_emb", (len(COMMANDS), d), EMBED_STD)
        if self.toggles.planning_intra:
            self.plan_init_attn = reg.attn("planning.init_attn", d)
            self.plan_init_norm = reg.norm("planning.init_norm", d)
        self.plan_layers = [reg.planning_layer(f"planning.layers.{i}", d)
                            for i in range(cfg.n_layers)]
        self.plan_point_head = reg.ff("planning.point_head", d, d, 2)
        self.plan_mode_w = reg.normal("planning.mode_head.w", (d, 1), 1.0 / math.sqrt(d))
        self.plan_mode_b = reg.zeros("planning.mode_head.b", (1,))

        self.params = reg.params

    # -- parameter access ---------------------------------------------------

    def parameters(self):
        return list(self.params.values())

    def state_arrays(self):
        return {name: p.values for name, p in self.params.items()}

    def load_state(self, arrays):
        missing = set(self.params) - set(arrays)
        extra = set(arrays) - set(self.params)
        if missing or extra:
            raise ConfigError(
                f"parameter set mismatch: missing={sorted(missing)[:3]} extra={sorted(extra)[:3]}")
        for name, p in self.params.items():
            arr = np.asarray(arrays[name], dtype=np.float64)
            if arr.shape != p.values.shape:
                raise ConfigError(f"parameter {name}: shape {arr.shape} != {p.values.shape}")
            p.values = arr.copy()
            p.grad = None

    # -- masks under ablation ----------------------------------------------

    def _layer_mask(self, mask, intra_on):
        if intra_on and self.toggles.masked_self_attention:
            return mask
        return None  # plain all-allowed self-attention

    def _init_mask(self, mask):
        return mask if self.toggles.masked_self_attention else None

    # -- forward pieces ------------------------------------------------------

    def encode_bev(self, grids):
        """Project one or more BEV grids into (batch * H * W, d_model) tokens."""
        if isinstance(grids, BevGrid):
            grids = [grids]
        h, w, c = grids[0].data.shape
        if c != N_BEV_CHANNELS:
            raise ShapeError(f"BEV grid has {c} channels, expected {N_BEV_CHANNELS}")
        tokens = np.concatenate([g.tokens for g in grids], axis=0)
        proj = linear(Tensor(tokens), self.bev_proj_w, self.bev_proj_b)
        posenc = positional_encoding_2d(h, w, self.cfg.d_model)
        if len(grids) > 1:
            posenc = np.tile(posenc, (len(grids), 1))
        return proj + Tensor(posenc)

    def _point_head(self, q, head):
        return linear(relu(linear(q, head.w1, head.b1)), head.w2, head.b2)

    @staticmethod
    def _tile_batch(q, batch):
        if batch == 1:
            return q
        n, d = q.shape
        return reshape(add(reshape(q, (1, n, d)), Tensor(np.zeros((batch, 1, 1)))),
                       (batch * n, d))

    def perception(self, bev_tokens, batch=1):
        """Map decoder: returns (queries, points (B, M_I, M_P, 2),
        class logits (B, M_I, classes + 1))."""
        cfg = self.cfg
        nh = cfg.n_heads
        q = self._tile_batch(compose_queries(self.map_inst_emb, self.map_point_emb), batch)
        mask = mask_for_perception(cfg)
        if self.toggles.perception_intra:
            q = self_attention_block(q, self.perc_init_attn, self.perc_init_norm,
                                     nh, self._init_mask(mask), batch)
        layer_mask = self._layer_mask(mask, self.toggles.perception_intra)
        for layer in self.perc_layers:
            q = cross_attention_block(q, bev_tokens, layer.cross, layer.norm_cross,
                                      nh, batch)
            q = self_attention_block(q, layer.self_attn, layer.norm_self, nh,
                                     layer_mask, batch)
            q = feed_forward_block(q, layer.ff, layer.norm_ff)
        pts = reshape(self._point_head(q, self.map_point_head),
                      (batch, cfg.map_instances, cfg.map_points, 2))
        pooled = mean(reshape(q, (batch * cfg.map_instances, cfg.map_points,
                                  cfg.d_model)), axis=1)
        cls = reshape(linear(pooled, self.map_class_w, self.map_class_b),
                      (batch, cfg.map_instances, cfg.map_classes + 1))
        return q, pts, cls

    def prediction(self, bev_tokens, anchors, batch=1):
        """Motion decoder. anchors: (B, N_O, 2) trajectory start positions,
        the origin for idle slots beyond the scene's agent count."""
        cfg = self.cfg
        nh = cfg.n_heads
        if anchors.shape != (batch, cfg.agent_queries, 2):
            raise ShapeError(
                f"anchors must be ({batch}, {cfg.agent_queries}, 2), got {anchors.shape}")
        q = self._tile_batch(
            compose_motion_queries(self.agent_emb, self.mode_emb, self.traj_point_emb),
            batch)
        mask = mask_for_prediction(cfg, cfg.agent_queries)
        if self.toggles.prediction_intra:
            q = self_attention_block(q, self.pred_init_attn, self.pred_init_norm,
                                     nh, self._init_mask(mask), batch)
        layer_mask = self._layer_mask(mask, self.toggles.prediction_intra)
        for layer in self.pred_layers:
            q = cross_attention_block(q, bev_tokens, layer.cross, layer.norm_cross,
                                      nh, batch)
            q = self_attention_block(q, layer.self_attn, layer.norm_self, nh,
                                     layer_mask, batch)
            q = feed_forward_block(q, layer.ff, layer.norm_ff)
        n_o, n_i, n_p, d = (cfg.agent_queries, cfg.agent_modes,
                            cfg.traj_points, cfg.d_model)
        offsets = reshape(self._point_head(q, self.pred_point_head),
                          (batch, n_o, n_i, n_p, 2))
        traj = cumsum(offsets, axis=3) + Tensor(anchors[:, :, None, None, :])
        per_mode = mean(reshape(q, (batch * n_o * n_i, n_p, d)), axis=1)
        mode_logits = reshape(linear(per_mode, self.pred_mode_w, self.pred_mode_b),
                              (batch, n_o, n_i))
        per_agent = mean(reshape(q, (batch * n_o, n_i * n_p, d)), axis=1)
        exist = reshape(linear(per_agent, self.pred_exist_w, self.pred_exist_b),
                        (batch, n_o))
        return q, traj, mode_logits, exist

    def planning(self, map_queries, motion_queries, commands, batch=None):
        """Ego decoder: cross-attends the other decoders' final queries only
        (no BEV input). commands: one command string, or one per batch item."""
        cfg = self.cfg
        nh = cfg.n_heads
        if isinstance(commands, str):
            commands = [commands]
        if batch is None:
            batch = len(commands)
        cmd = gather_rows(self.command_emb, [command_index(c) for c in commands])
        inst = add(reshape(self.ego_mode_emb, (1, cfg.ego_modes, cfg.d_model)),
                   reshape(cmd, (batch, 1, cfg.d_model)))
        q = reshape(add(reshape(inst, (batch, cfg.ego_modes, 1, cfg.d_model)),
                        reshape(self.ego_point_emb, (1, 1, cfg.ego_points, cfg.d_model))),
                    (batch * cfg.ego_modes * cfg.ego_points, cfg.d_model))
        mask = mask_for_planning(cfg)
        if self.toggles.planning_intra:
            q = self_attention_block(q, self.plan_init_attn, self.plan_init_norm,
                                     nh, self._init_mask(mask), batch)
        layer_mask = self._layer_mask(mask, self.toggles.planning_intra)
        for layer in self.plan_layers:
            q = cross_attention_block(q, map_queries, layer.cross_map,
                                      layer.norm_map, nh, batch)
            q = cross_attention_block(q, motion_queries, layer.cross_motion,
                                      layer.norm_motion, nh, batch)
            q = self_attention_block(q, layer.self_attn, layer.norm_self, nh,
                                     layer_mask, batch)
            q = feed_forward_block(q, layer.ff, layer.norm_ff)
        offsets = reshape(self._point_head(q, self.plan_point_head),
                          (batch, cfg.ego_modes, cfg.ego_points, 2))
        traj = cumsum(offsets, axis=2)
        pooled = mean(reshape(q, (batch * cfg.ego_modes, cfg.ego_points,
                                  cfg.d_model)), axis=1)
        mode_logits = reshape(linear(pooled, self.plan_mode_w, self.plan_mode_b),
                              (batch, cfg.ego_modes))
        return traj, mode_logits

    def agent_anchors(self, scenes):
        cfg = self.cfg
        anchors = np.zeros((len(scenes), cfg.agent_queries, 2))
        for b, scene in enumerate(scenes):
            n = len(scene.agents)
            if n > cfg.agent_queries:
                raise ShapeError(
                    f"scene has {n} agents but only {cfg.agent_queries} query slots")
            for i, ag in enumerate(scene.agents):
                anchors[b, i] = ag.position
        return anchors

    def forward_batch(self, scenes, scene_cfg, bevs=None) -> "BatchOutput":
        if bevs is None:
            bevs = [rasterize_bev(s, scene_cfg) for s in scenes]
        batch = len(scenes)
        tokens = self.encode_bev(bevs)
        map_q, map_pts, map_cls = self.perception(tokens, batch)
        motion_q, traj, mode_logits, exist = self.prediction(
            tokens, self.agent_anchors(scenes), batch)
        ego_traj, ego_mode = self.planning(map_q, motion_q,
                                           [s.command for s in scenes], batch)
        return BatchOutput(
            cfg=self.cfg, n_agents=[len(s.agents) for s in scenes],
            map_points=map_pts, map_class_logits=map_cls,
            agent_trajectories=traj, agent_mode_logits=mode_logits,
            agent_existence_logits=exist,
            ego_trajectories=ego_traj, ego_mode_logits=ego_mode,
            map_queries=map_q, motion_queries=motion_q)

    def forward_scene(self, scene, scene_cfg, bev: BevGrid = None) -> ModelOutput:
        return self.forward_batch(
            [scene], scene_cfg, None if bev is None else [bev]).scene_output(0)
