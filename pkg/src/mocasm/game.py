"""Singleton congestion games with player-specific costs.

Each player picks exactly one resource. A resource used by a single player
costs that player its tabulated value; a shared resource costs +inf. Under
this two-valued structure a best-response move never changes any other
player's cost, so the sum of realised costs strictly drops with every move
and best-response dynamics always terminate in a pure Nash equilibrium.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

NONE = None


class EquilibriumError(RuntimeError):
    """Best-response dynamics exceeded their provable move bound."""


@dataclass(frozen=True)
class GameSpec:
    """One round's game: who plays, what can be picked, and at what cost.

    ``cost[i, j]`` is the cost to ``players[i]`` of holding ``resources[j]``
    alone. Resources are kept in ascending id order so positional argmin
    doubles as the id tie-break.
    """

    players: tuple
    resources: tuple
    cost: np.ndarray
    _player_pos: dict = field(init=False, repr=False, compare=False)
    _resource_pos: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        players = tuple(self.players)
        resources = tuple(self.resources)
        cost = np.array(self.cost, dtype=float)
        if not players or not resources:
            raise ValueError("a game needs at least one player and one resource")
        if len(set(players)) != len(players) or len(set(resources)) != len(resources):
            raise ValueError("player and resource ids must be unique")
        if cost.shape != (len(players), len(resources)):
            raise ValueError(
                f"cost table must be {len(players)}x{len(resources)}, got {cost.shape}"
            )
        if not np.all(np.isfinite(cost)):
            raise ValueError("stored costs must be finite; sharing is priced implicitly")
        order = sorted(range(len(resources)), key=lambda j: resources[j])
        resources = tuple(resources[j] for j in order)
        cost = cost[:, order]
        cost.setflags(write=False)
        object.__setattr__(self, "players", players)
        object.__setattr__(self, "resources", resources)
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "_player_pos", {p: i for i, p in enumerate(players)})
        object.__setattr__(self, "_resource_pos", {r: j for j, r in enumerate(resources)})

    @property
    def n_players(self) -> int:
        return len(self.players)

    @property
    def n_resources(self) -> int:
        return len(self.resources)

    def stored_cost(self, player: Hashable, resource: Hashable) -> float:
        return float(self.cost[self._player_pos[player], self._resource_pos[resource]])


@dataclass(frozen=True)
class StrategyProfile:
    choice: Mapping
    congestion: Mapping

    @classmethod
    def from_choice(cls, choice: Mapping) -> "StrategyProfile":
        choice = dict(choice)
        congestion = Counter(r for r in choice.values() if r is not NONE)
        return cls(choice, dict(congestion))


@dataclass(frozen=True)
class EquilibriumResult:
    profile: StrategyProfile
    moves: int
    cost_trace: tuple


def cost_of(game: GameSpec, player: Hashable, resource: Hashable, congestion: int) -> float:
    if congestion < 1:
        raise ValueError("congestion of a chosen resource is at least 1")
    if congestion > 1:
        return math.inf
    return game.stored_cost(player, resource)


def payoff(game: GameSpec, player: Hashable, resource: Hashable, congestion: int) -> float:
    return -cost_of(game, player, resource, congestion)


def _current_cost(game: GameSpec, profile: StrategyProfile, player: Hashable) -> float:
    r = profile.choice.get(player, NONE)
    if r is NONE:
        return math.inf
    return cost_of(game, player, r, profile.congestion[r])


def _deviation_costs(game: GameSpec, profile: StrategyProfile, player: Hashable) -> np.ndarray:
    """Cost to ``player`` of switching to each resource, others held fixed."""
    row = game.cost[game._player_pos[player]].copy()
    current = profile.choice.get(player, NONE)
    for r, n in profile.congestion.items():
        if r not in game._resource_pos:
            continue
        others = n - (1 if r == current else 0)
        if others >= 1:
            row[game._resource_pos[r]] = math.inf
    return row


def best_response(game: GameSpec, profile: StrategyProfile, player: Hashable):
    """Cheapest resource given everyone else's choice; NONE if nothing is finite."""
    row = _deviation_costs(game, profile, player)
    j = int(np.argmin(row))
    if not np.isfinite(row[j]):
        return NONE
    return game.resources[j]


def _waiting_cost(game: GameSpec) -> float:
    # charge for a player holding nothing; above every stored cost so that
    # placing a player always lowers the running total
    return float(game.cost.max()) + 1.0


def _total_cost(game: GameSpec, profile: StrategyProfile, waiting: float) -> float:
    total = 0.0
    for p in game.players:
        c = _current_cost(game, profile, p)
        total += waiting if c == math.inf else c
    return total


def solve_equilibrium(game: GameSpec) -> EquilibriumResult:
    """Pure Nash equilibrium by sequential insertion then best-response sweeps.

    Players enter in list order, each taking its best free resource; when
    resources run out the remaining players hold NONE. Round-robin sweeps
    follow until a full pass moves nobody.

    ``cost_trace`` records the total cost after every move, counting a
    player holding NONE at a waiting cost above every stored value.
    """
    choice = {p: NONE for p in game.players}
    profile = StrategyProfile.from_choice(choice)
    waiting = _waiting_cost(game)
    cap = game.n_players * game.n_resources
    moves = 0
    trace = []

    def move(player, resource):
        nonlocal profile, moves
        choice[player] = resource
        profile = StrategyProfile.from_choice(choice)
        moves += 1
        if moves > cap:
            raise EquilibriumError(f"{moves} moves exceed the bound of {cap}")
        trace.append(_total_cost(game, profile, waiting))

    for p in game.players:
        r = best_response(game, profile, p)
        if r is not NONE:
            move(p, r)

    moved = True
    while moved:
        moved = False
        for p in game.players:
            r = best_response(game, profile, p)
            if r is NONE or r == choice[p]:
                continue
            if game.stored_cost(p, r) < _current_cost(game, profile, p):
                move(p, r)
                moved = True

    return EquilibriumResult(profile, moves, tuple(trace))


def verify_equilibrium(game: GameSpec, profile: StrategyProfile):
    """Exhaustively check every unilateral deviation.

    Returns ``(True, None)`` for an equilibrium, else ``(False, (player,
    resource))`` for the first strictly profitable deviation found, scanning
    players in order and resources by ascending id.
    """
    for p in game.players:
        current = _current_cost(game, profile, p)
        row = _deviation_costs(game, profile, p)
        better = np.flatnonzero(row < current)
        if better.size:
            return False, (p, game.resources[int(better[0])])
    return True, None


def random_game(
    n_players: int, n_resources: int, rng: np.random.Generator, low: float = -1.0, high: float = 0.0
) -> GameSpec:
    """Random game with costs drawn uniformly from ``[low, high)``."""
    cost = rng.uniform(low, high, size=(n_players, n_resources))
    return GameSpec(tuple(range(n_players)), tuple(range(n_resources)), cost)


def enumerate_equilibria(game: GameSpec) -> list:
    """Every pure equilibrium by brute force. Small games only."""
    from itertools import product

    options: Sequence = list(game.resources) + [NONE]
    found = []
    for combo in product(options, repeat=game.n_players):
        profile = StrategyProfile.from_choice(dict(zip(game.players, combo)))
        if verify_equilibrium(game, profile)[0]:
            found.append(profile)
    return found
