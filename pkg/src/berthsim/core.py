"""Event-calendar kernel: clock, entities, deterministic ordering, state, tracing.

A run is strictly sequential.  Events fire in ``(fire_at, seq)`` order where
``seq`` is the scheduling counter, so simultaneous events fire FIFO and a
run is a pure function of (model instance, seed).

Events carry a ``daemon`` flag: housekeeping events (disruption generator
ticks, repair completions nobody is waiting on) never keep a run alive.
The run loop stops once only daemon events remain, which is the moment the
entity flow itself has drained.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .errors import (
    DeadlockError,
    NonTerminationError,
    PastTimeError,
    UnknownStateError,
)
from .stochastics import derive_stream

__all__ = ["Entity", "Event", "RunResult", "Simulation", "TRACE_ACTIONS"]

TRACE_ACTIONS = (
    "create",
    "enter",
    "capture",
    "release",
    "preempt",
    "resume",
    "branch",
    "batch",
    "unbatch",
    "consolidate",
    "valve_open",
    "valve_close",
    "count",
    "destroy",
)


class Entity:
    """The unit of flow: a work batch with attributes and optional contents."""

    __slots__ = ("id", "created_at", "attributes", "contents", "holds", "where")

    def __init__(self, eid: int, created_at: float):
        self.id = eid
        self.created_at = created_at
        self.attributes: dict[str, float] = {}
        self.contents: list[Entity] = []
        self.holds: dict[str, int] = {}
        self.where: str = "new"

    def __repr__(self):
        return f"Entity({self.id} @ {self.where})"


class Event:
    """A calendar entry; cancellation is lazy (flag checked at pop time)."""

    __slots__ = ("fire_at", "seq", "target_id", "entity", "tag", "handler", "cancelled", "daemon")

    def __init__(self, fire_at, seq, target_id, entity, tag, handler, daemon):
        self.fire_at = fire_at
        self.seq = seq
        self.target_id = target_id
        self.entity = entity
        self.tag = tag
        self.handler = handler
        self.cancelled = False
        self.daemon = daemon

    def __repr__(self):
        return f"Event(t={self.fire_at}, seq={self.seq}, target={self.target_id}, tag={self.tag})"


@dataclass
class RunResult:
    """Per-run outcome: final clock, tallies, resource utilization, optional trace."""

    end_time: float
    counters: dict[str, int]
    utilization: dict[str, float]
    trace: list | None = None
    events_executed: int = 0
    entities_created: int = 0
    entities_destroyed: int = 0
    stop_reason: str = "drained"


@dataclass
class _StateVar:
    value: object
    setter: object = None  # optional callback, e.g. a valve reacting to writes


class Simulation:
    """One run's mutable world: calendar, clock, states, registries, trace."""

    def __init__(self, seed: int = 0, trace: bool = False, event_ceiling: int = 10_000_000):
        self.clock = 0.0
        self.seed = seed
        self.event_ceiling = event_ceiling
        self._heap: list[tuple[float, int, Event]] = []
        self._seq = 0
        self._live_events = 0  # scheduled, non-cancelled, non-daemon
        self._executed = 0
        self._last_fired_at = 0.0
        self._stopped = None  # stop reason string once set

        self._states: dict[str, _StateVar] = {}
        self.counters: dict[str, int] = {}
        self._streams: dict[str, object] = {}

        self._next_entity_id = 1
        self.created = 0
        self.destroyed = 0

        self.trace: list | None = [] if trace else None
        self._trace_seq = 0

        # registries filled by the element layer
        self.pools: dict[str, object] = {}
        self.gates: dict[str, object] = {}
        self.elements: dict[str, object] = {}
        self._wait_introspectors: list = []

    # -- randomness --------------------------------------------------------

    def stream(self, name: str):
        s = self._streams.get(name)
        if s is None:
            s = derive_stream(self.seed, name)
            self._streams[name] = s
        return s

    # -- entities ----------------------------------------------------------

    def new_entity(self) -> Entity:
        e = Entity(self._next_entity_id, self.clock)
        self._next_entity_id += 1
        self.created += 1
        return e

    def destroy_entity(self, e: Entity):
        e.where = "destroyed"
        self.destroyed += 1

    def in_system(self) -> int:
        return self.created - self.destroyed

    # -- calendar ----------------------------------------------------------

    def schedule(self, delay: float, handler, target_id: str = "", entity: Entity | None = None,
                 tag: str = "", daemon: bool = False) -> Event:
        """Schedule ``handler(entity)`` to fire ``delay`` from now."""
        if delay < 0:
            raise PastTimeError(
                f"cannot schedule at t={self.clock + delay} before clock t={self.clock}")
        return self.schedule_at(self.clock + delay, handler, target_id, entity, tag, daemon)

    def schedule_at(self, fire_at: float, handler, target_id: str = "",
                    entity: Entity | None = None, tag: str = "", daemon: bool = False) -> Event:
        if fire_at < self.clock:
            raise PastTimeError(f"cannot schedule at t={fire_at} before clock t={self.clock}")
        self._seq += 1
        ev = Event(fire_at, self._seq, target_id, entity, tag, handler, daemon)
        heapq.heappush(self._heap, (fire_at, self._seq, ev))
        if not daemon:
            self._live_events += 1
        return ev

    def cancel(self, ev: Event):
        if not ev.cancelled:
            ev.cancelled = True
            if not ev.daemon:
                self._live_events -= 1

    def set_daemon(self, ev: Event, daemon: bool):
        """Reclassify a pending event (a reopen someone started waiting on)."""
        if ev.cancelled or ev.daemon == daemon:
            return
        ev.daemon = daemon
        self._live_events += -1 if daemon else 1

    def calendar_size(self) -> int:
        return sum(1 for _, _, ev in self._heap if not ev.cancelled)

    def advance(self) -> Event | None:
        """Fire the event with minimal (fire_at, seq); None when calendar empty."""
        while self._heap:
            fire_at, _, ev = heapq.heappop(self._heap)
            if ev.cancelled:
                continue
            assert fire_at >= self.clock
            self.clock = fire_at
            self._last_fired_at = fire_at
            if not ev.daemon:
                self._live_events -= 1
            self._executed += 1
            ev.handler(ev.entity)
            return ev
        return None

    def stop(self, reason: str):
        self._stopped = reason

    # -- state variables ----------------------------------------------------

    def declare_state(self, name: str, value, setter=None):
        self._states[name] = _StateVar(value, setter)

    def has_state(self, name: str) -> bool:
        return name in self._states

    def set_state(self, name: str, value):
        var = self._states.get(name)
        if var is None:
            raise UnknownStateError(f"state variable {name!r} is not declared")
        var.value = value
        if var.setter is not None:
            var.setter(value)

    def get_state(self, name: str):
        var = self._states.get(name)
        if var is None:
            raise UnknownStateError(f"state variable {name!r} is not declared")
        return var.value

    # -- trace ---------------------------------------------------------------

    def record(self, element_id: str, entity: Entity | None, action: str):
        if self.trace is not None:
            self._trace_seq += 1
            self.trace.append(
                (self.clock, self._trace_seq, element_id, entity.id if entity else -1, action))

    # -- counters -------------------------------------------------------------

    def bump(self, counter: str, by: int = 1) -> int:
        value = self.counters.get(counter, 0) + by
        self.counters[counter] = value
        return value

    # -- run loop --------------------------------------------------------------

    def register_wait_introspector(self, fn):
        self._wait_introspectors.append(fn)

    def waiting_entities(self) -> dict[int, list[str]]:
        graph: dict[int, list[str]] = {}
        for fn in self._wait_introspectors:
            for eid, needs in fn():
                graph.setdefault(eid, []).extend(needs)
        return graph

    def run_to_completion(self) -> RunResult:
        """Advance until the consequential calendar drains (or stop/ceiling)."""
        while self._stopped is None:
            if self._live_events == 0:
                break
            if self._executed >= self.event_ceiling:
                raise NonTerminationError(
                    f"event ceiling of {self.event_ceiling} exceeded at t={self.clock} "
                    f"({self._executed} events executed); the model likely cycles")
            self.advance()
        waiters = self.waiting_entities()
        if self._stopped is None and waiters:
            raise DeadlockError(
                f"calendar drained at t={self.clock} with {len(waiters)} entities "
                f"still waiting for resources", wait_graph=waiters)
        return self._finalize()

    def _finalize(self) -> RunResult:
        end = self._last_fired_at
        util = {}
        for name, pool in self.pools.items():
            util[name] = pool.utilization(end)
        counters = dict(self.counters)
        return RunResult(
            end_time=end,
            counters=counters,
            utilization=util,
            trace=self.trace,
            events_executed=self._executed,
            entities_created=self.created,
            entities_destroyed=self.destroyed,
            stop_reason=self._stopped or "drained",
        )
