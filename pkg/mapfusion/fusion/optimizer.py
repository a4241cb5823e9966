#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Sparse nonlinear least-squares back-end.

:class:`FusionGraph` holds pose variables and factors; :func:`optimize`
minimizes the sum of squared whitened residuals with Gauss-Newton steps on
sparse normal equations, falling back to Levenberg damping when a step
increases the cost.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import splu
from scipy.spatial.transform import Rotation

from ..exceptions import GaugeError, SingularSystemError
from ..geom import Pose
from ..utils.logging_config import LoggerMixin
from .factors import BetweenFactor, PriorFactor, between_kernel, prior_kernel, retract, so3_exp
from .noise import DIMENSION_NAMES, NoiseModel

logger = logging.getLogger(__name__)

Factor = Union[BetweenFactor, PriorFactor]

_LAMBDA_START = 1e-3
_LAMBDA_TRIES = 10
_GRAD_TOL = 1e-12
_COST_FLOOR = 1e-24


class FusionGraph(LoggerMixin):
    """Pose variables with between and prior factors.

    Variable ids are assigned in insertion order and never reused; when the
    oldest poses are marginalized the remaining ids keep their values.
    """

    def __init__(self):
        self.first_id = 0
        self._translations = np.empty((0, 3))
        self._rotations = np.empty((0, 3, 3))
        self.factors: List[Factor] = []

    def __len__(self):
        return len(self._translations)

    @property
    def next_id(self) -> int:
        return self.first_id + len(self)

    @property
    def ids(self) -> range:
        return range(self.first_id, self.next_id)

    def add_pose(self, pose: Pose) -> int:
        """Append a pose variable initialized at ``pose``; returns its id."""
        self._translations = np.vstack([self._translations, pose.translation[None]])
        self._rotations = np.concatenate([self._rotations, pose.rotation_matrix[None]])
        return self.next_id - 1

    def _local(self, pose_id: int) -> int:
        local = pose_id - self.first_id
        if not 0 <= local < len(self):
            raise KeyError(f"unknown pose id {pose_id}")
        return local

    def add_factor(self, factor: Factor):
        for key in factor.keys:
            self._local(key)
        self.factors.append(factor)

    def add_between(self, i: int, j: int, measured: Pose, noise: NoiseModel) -> BetweenFactor:
        factor = BetweenFactor(i, j, measured, noise)
        self.add_factor(factor)
        return factor

    def add_prior(self, i: int, measured: Pose, noise: NoiseModel, kind: str = 'user') -> PriorFactor:
        factor = PriorFactor(i, measured, noise, kind)
        self.add_factor(factor)
        return factor

    def pose(self, pose_id: int) -> Pose:
        local = self._local(pose_id)
        return Pose.from_rotation(Rotation.from_matrix(self._rotations[local]),
                                  self._translations[local])

    @property
    def poses(self) -> List[Pose]:
        return [self.pose(k) for k in self.ids]

    def set_pose(self, pose_id: int, pose: Pose):
        local = self._local(pose_id)
        self._translations[local] = pose.translation
        self._rotations[local] = pose.rotation_matrix

    def state(self) -> Tuple[np.ndarray, np.ndarray]:
        return self._translations.copy(), self._rotations.copy()

    def set_state(self, translations: np.ndarray, rotations: np.ndarray):
        self._translations = np.array(translations, dtype=float)
        self._rotations = np.array(rotations, dtype=float)

    def priors(self, kind: Optional[str] = None) -> List[PriorFactor]:
        return [f for f in self.factors
                if isinstance(f, PriorFactor) and (kind is None or f.kind == kind)]

    # ------------------------------------------------------------------
    # Linearization
    # ------------------------------------------------------------------
    def _split(self) -> Tuple[List[BetweenFactor], List[PriorFactor]]:
        betweens = [f for f in self.factors if isinstance(f, BetweenFactor)]
        priors = [f for f in self.factors if isinstance(f, PriorFactor)]
        return betweens, priors

    def linearize(self, translations: Optional[np.ndarray] = None,
                  rotations: Optional[np.ndarray] = None
                  ) -> Tuple[np.ndarray, sparse.csc_matrix]:
        """Whitened residual vector and sparse Jacobian at a state."""
        t = self._translations if translations is None else translations
        R = self._rotations if rotations is None else rotations
        betweens, priors = self._split()
        blocks, residuals, rows, cols = [], [], [], []
        row = 0
        if betweens:
            li = np.array([f.i for f in betweens]) - self.first_id
            lj = np.array([f.j for f in betweens]) - self.first_id
            t_z = np.array([f.measured.translation for f in betweens])
            R_z = np.array([f.measured.rotation_matrix for f in betweens])
            W = np.array([f.noise.sqrt_information for f in betweens])
            r, J_i, J_j = between_kernel(t[li], R[li], t[lj], R[lj], t_z, R_z)
            residuals.append(np.einsum('nab,nb->na', W, r))
            factor_rows = row + np.arange(len(betweens))
            for local, jac in ((li, J_i), (lj, J_j)):
                blocks.append(W @ jac)
                rows.append(factor_rows)
                cols.append(local)
            row += len(betweens)
        if priors:
            li = np.array([f.i for f in priors]) - self.first_id
            t_m = np.array([f.measured.translation for f in priors])
            R_m = np.array([f.measured.rotation_matrix for f in priors])
            W = np.array([f.noise.sqrt_information for f in priors])
            r, J = prior_kernel(t[li], R[li], t_m, R_m)
            residuals.append(np.einsum('nab,nb->na', W, r))
            blocks.append(W @ J)
            rows.append(row + np.arange(len(priors)))
            cols.append(li)
            row += len(priors)

        n_rows, n_cols = 6 * row, 6 * len(self)
        if not blocks:
            return np.zeros(0), sparse.csc_matrix((n_rows, n_cols))
        offsets = np.arange(6)
        data, ii, jj = [], [], []
        for block, r_idx, c_idx in zip(blocks, rows, cols):
            ii.append(np.broadcast_to(6 * r_idx[:, None, None] + offsets[None, :, None],
                                      block.shape).ravel())
            jj.append(np.broadcast_to(6 * c_idx[:, None, None] + offsets[None, None, :],
                                      block.shape).ravel())
            data.append(block.ravel())
        jacobian = sparse.coo_matrix((np.concatenate(data), (np.concatenate(ii), np.concatenate(jj))),
                                     shape=(n_rows, n_cols)).tocsc()
        return np.concatenate([r.ravel() for r in residuals]), jacobian

    def cost(self, translations: Optional[np.ndarray] = None,
             rotations: Optional[np.ndarray] = None) -> float:
        residual, _ = self.linearize(translations, rotations)
        return float(residual @ residual)

    def retract_state(self, delta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """State after the tangent update ``delta`` (length ``6 * len(self)``)."""
        delta = delta.reshape(-1, 6)
        return self._translations + delta[:, :3], self._rotations @ so3_exp(delta[:, 3:])

    # ------------------------------------------------------------------
    # Structure checks
    # ------------------------------------------------------------------
    def check_gauge(self):
        """Raise :class:`GaugeError` when the graph lacks a prior or is disconnected."""
        if len(self) == 0:
            raise GaugeError("the graph has no pose variables")
        if not self.priors():
            raise GaugeError("the graph has no prior factor; the gauge is free")
        betweens, _ = self._split()
        n = len(self)
        if n > 1:
            i = np.array([f.i for f in betweens], dtype=np.int64) - self.first_id
            j = np.array([f.j for f in betweens], dtype=np.int64) - self.first_id
            adjacency = sparse.coo_matrix((np.ones(len(i)), (i, j)), shape=(n, n))
            count, labels = csgraph.connected_components(adjacency, directed=False)
            if count > 1:
                detached = np.flatnonzero(labels != labels[0]) + self.first_id
                raise GaugeError(f"the graph has {count} disconnected components; poses "
                                 f"{detached[:10].tolist()} are not reachable from pose "
                                 f"{self.first_id}")

    def dimension_name(self, column: int) -> str:
        return f"pose {self.first_id + column // 6}: {DIMENSION_NAMES[column % 6]}"

    # ------------------------------------------------------------------
    # Marginalization
    # ------------------------------------------------------------------
    def marginalize_oldest(self) -> bool:
        """Fold the oldest pose into a prior on its neighbour.

        Only chain structures are supported: every factor on the oldest pose
        must otherwise touch a single neighbouring pose. Returns False (and
        changes nothing) when that does not hold.
        """
        if len(self) < 2:
            return False
        oldest = self.first_id
        touching = [f for f in self.factors if oldest in f.keys]
        neighbours = {k for f in touching for k in f.keys if k != oldest}
        if len(neighbours) != 1:
            self.logger.warning(f"Cannot marginalize pose {oldest}: it is linked to "
                                f"{len(neighbours)} poses")
            return False
        neighbour = neighbours.pop()

        sub = FusionGraph()
        sub.add_pose(self.pose(oldest))
        sub.add_pose(self.pose(neighbour))
        remap = {oldest: 0, neighbour: 1}
        for f in touching:
            if isinstance(f, BetweenFactor):
                sub.add_factor(BetweenFactor(remap[f.i], remap[f.j], f.measured, f.noise))
            else:
                sub.add_factor(PriorFactor(remap[f.i], f.measured, f.noise, f.kind))
        residual, jacobian = sub.linearize()
        H = (jacobian.T @ jacobian).toarray()
        b = jacobian.T @ residual
        H_mm, H_mn, H_nn = H[:6, :6], H[:6, 6:], H[6:, 6:]
        b_m, b_n = b[:6], b[6:]
        H_mm_inv = np.linalg.pinv(H_mm)
        info = H_nn - H_mn.T @ H_mm_inv @ H_mn
        info = 0.5 * (info + info.T)
        gradient = b_n - H_mn.T @ H_mm_inv @ b_m
        shift = -np.linalg.lstsq(info, gradient, rcond=None)[0]
        eigenvalues, eigenvectors = np.linalg.eigh(info)
        info = (eigenvectors * np.clip(eigenvalues, 0.0, None)) @ eigenvectors.T

        measured = retract(self.pose(neighbour), shift)
        self.factors = [f for f in self.factors if oldest not in f.keys]
        self.factors.append(PriorFactor(neighbour, measured, NoiseModel(info), 'marginal'))
        self._translations = self._translations[1:]
        self._rotations = self._rotations[1:]
        self.first_id += 1
        self.logger.debug(f"Marginalized pose {oldest} into a prior on pose {neighbour}")
        return True

    def __repr__(self):
        return f"FusionGraph(poses={len(self)}, factors={len(self.factors)}, first_id={self.first_id})"


@dataclass
class OptimizationResult:
    """Outcome of :func:`optimize`.

    ``poses`` maps pose id to its estimate; ``converged`` is False when the
    iteration cap was reached first, in which case the best iterate is
    returned.
    """

    poses: Dict[int, Pose]
    cost: float
    initial_cost: float
    iterations: int
    converged: bool
    first_id: int = 0
    _factor: object = field(default=None, repr=False)
    _size: int = field(default=0, repr=False)

    def marginal_covariance(self, pose_id: int) -> np.ndarray:
        """6x6 marginal covariance of a pose at the final linearization point."""
        if self._factor is None:
            raise SingularSystemError("no factorization available for marginals")
        local = pose_id - self.first_id
        if not 0 <= local < self._size // 6:
            raise KeyError(f"unknown pose id {pose_id}")
        rhs = np.zeros((self._size, 6))
        rhs[6 * local:6 * local + 6] = np.eye(6)
        covariance = self._factor.solve(rhs)[6 * local:6 * local + 6]
        return 0.5 * (covariance + covariance.T)

    @property
    def covariances(self) -> Dict[int, np.ndarray]:
        return {k: self.marginal_covariance(k) for k in self.poses}

    @property
    def last_id(self) -> int:
        return max(self.poses)


def _factorize(H: sparse.csc_matrix):
    try:
        return splu(H.tocsc())
    except RuntimeError as e:
        raise SingularSystemError(f"normal equations are singular: {e}")


def optimize(graph: FusionGraph, initial: Optional[Sequence[Pose]] = None,
             max_iterations: int = 100, step_tol: float = 1e-10) -> OptimizationResult:
    """Minimize the sum of squared whitened residuals of ``graph``.

    Parameters
    ----------
    graph : FusionGraph
        Factor graph; its variables are updated in place with the result.
    initial : Sequence[Pose], optional
        Initial values, one per variable in id order; defaults to the
        current variable values.
    max_iterations : int
        Iteration cap.
    step_tol : float
        The solution is accepted once the largest component of an undamped
        Gauss-Newton step falls below ``step_tol * (1 + max |t|)``, or the
        gradient vanishes.

    Returns
    -------
    OptimizationResult
        Estimates, final cost and the factorization used for marginals.
        ``converged`` is False when the iteration cap is hit or damping
        finds no descent step.

    Raises
    ------
    GaugeError
        If the graph has no prior or is disconnected.
    SingularSystemError
        If the normal equations are singular; names the free dimensions.
    """
    graph.check_gauge()
    if initial is not None:
        if len(initial) != len(graph):
            raise ValueError(f"expected {len(graph)} initial poses, got {len(initial)}")
        for pose_id, pose in zip(graph.ids, initial):
            graph.set_pose(pose_id, pose)

    residual, jacobian = graph.linearize()
    cost = float(residual @ residual)
    initial_cost = cost
    converged = False
    stalled = False
    iterations = 0

    while not converged and iterations < max_iterations:
        iterations += 1
        H = (jacobian.T @ jacobian).tocsc()
        g = jacobian.T @ residual
        diagonal = H.diagonal()
        free = np.flatnonzero(diagonal <= 1e-14 * max(1.0, float(diagonal.max(initial=0.0))))
        if len(free):
            names = [graph.dimension_name(c) for c in free]
            raise SingularSystemError("normal equations are singular", names)
        if np.max(np.abs(g)) < _GRAD_TOL:
            converged = True
            break
        delta = -_factorize(H).solve(g)
        translations, _ = graph.state()
        small = bool(np.max(np.abs(delta)) < step_tol * (1.0 + np.max(np.abs(translations))))
        t_new, R_new = graph.retract_state(delta)
        new_cost = graph.cost(t_new, R_new)

        if new_cost > cost:
            if small:
                # at the minimum up to rounding
                converged = True
                break
            for k in range(_LAMBDA_TRIES):
                lam = _LAMBDA_START * 10.0 ** k
                damped = (H + lam * sparse.diags(diagonal)).tocsc()
                delta = -_factorize(damped).solve(g)
                t_new, R_new = graph.retract_state(delta)
                new_cost = graph.cost(t_new, R_new)
                if new_cost <= cost:
                    break
            else:
                stalled = True
                break

        graph.set_state(t_new, R_new)
        cost = new_cost
        residual, jacobian = graph.linearize()
        converged = small or cost < _COST_FLOOR

    # factorization at the final linearization point for marginals
    H = (jacobian.T @ jacobian).tocsc()
    factor = _factorize(H)
    if stalled:
        logger.warning(f"Optimizer found no descent step after {iterations} iterations "
                       f"(cost {cost:.6g})")
    elif not converged:
        logger.warning(f"Optimizer stopped after {iterations} iterations without converging "
                       f"(cost {cost:.6g})")
    else:
        logger.debug(f"Optimized {len(graph)} poses / {len(graph.factors)} factors in "
                     f"{iterations} iterations: cost {initial_cost:.6g} -> {cost:.6g}")
    return OptimizationResult({k: graph.pose(k) for k in graph.ids}, cost, initial_cost,
                              iterations, converged, graph.first_id, factor, 6 * len(graph))
