"""Literal interpreter of the abstract Task Vector Machine, used as a test oracle.

It shares nothing with the runtime's scheduling code: there are no epoch
numbers in slots, no NDRanges and no slot reuse.  The task mask stack is a
Python list of explicit per-core bit-vectors, NextFreeEntry only grows, and
each epoch pops one mask, runs every core whose bit is set, then pushes the
join mask and the fork mask (in that order) when they are non-zero.

Each mask also carries an epoch tag so logs can be lined up with the
runtime's epoch numbers: a pushed join mask inherits the popped tag and a
fork mask gets the popped tag plus one.  The tag is not the stack height;
an epoch that forks without joining replaces its mask at the same height
while the runtime advances its epoch number.  Tags never influence which
tasks run.
"""

from __future__ import annotations

from collections import Counter

from trees.program import Arena, Program


class RefContext:
    def __init__(self, vm, core, cen, epoch_index):
        self.vm = vm
        self.slot = core
        self.cen = cen
        self.epoch_index = epoch_index
        self.arena = vm.arena

    def fork(self, task, *args):
        vm = self.vm
        entry = vm.next_free_entry
        if entry >= vm.cores:
            raise RuntimeError("reference TVM ran out of cores")
        vm.next_free_entry += 1
        vm.tv[entry] = (vm.registry.task_id(task), tuple(int(a) for a in args))
        vm.fork_mask[entry] = 1
        return entry

    def join(self, task, *args):
        vm = self.vm
        vm.tv[self.slot] = (vm.registry.task_id(task), tuple(int(a) for a in args))
        vm.join_mask[self.slot] = 1

    def emit(self, value):
        self.vm.results[self.slot] = int(value)

    def map(self, fn, *args, range):
        self.vm.maps.append((self.vm.registry.map_id(fn), tuple(int(a) for a in args), range))

    def result(self, child):
        return self.vm.results[int(child)]


class ReferenceTVM:
    def __init__(self, program: Program, cores: int = 1 << 14):
        self.program = program
        self.registry = program.registry
        self.cores = cores
        self.arena = Arena(program.buffers)
        self.tv: list = [None] * cores
        self.results = [0] * cores
        self.tv[0] = program.root
        first = bytearray(cores)
        first[0] = 1
        self.tms = [(first, 0)]
        self.next_free_entry = 1
        self.fork_mask = bytearray(cores)
        self.join_mask = bytearray(cores)
        self.maps: list = []

    def label(self, task_id, args):
        name = self.registry.task_names[task_id - 1]
        if self.program.label is None:
            return (name, tuple(args))
        return self.program.label(name, tuple(args))

    def run(self, max_epochs: int = 100_000):
        """Execute to halt.  Returns ``[(cen, Counter(task labels)), ...]`` per epoch."""
        log = []
        epoch_index = 0
        while self.tms:
            if epoch_index >= max_epochs:
                raise RuntimeError("reference TVM did not halt")
            task_mask, cen = self.tms.pop()
            self.fork_mask = bytearray(self.cores)
            self.join_mask = bytearray(self.cores)
            executed = Counter()
            for core in range(self.next_free_entry):
                if not task_mask[core]:
                    continue
                task_id, args = self.tv[core]
                executed[self.label(task_id, args)] += 1
                fn = self.registry.task_fns[task_id - 1]
                fn(RefContext(self, core, cen, epoch_index), *args)
            if any(self.join_mask):
                self.tms.append((self.join_mask, cen))
            if any(self.fork_mask):
                self.tms.append((self.fork_mask, cen + 1))
            maps, self.maps = self.maps, []
            for fid, args, rng in maps:
                fn = self.registry.map_fns[fid - 1]
                for i in range(rng):
                    fn(self.arena, args, i)
            log.append((cen, executed))
            epoch_index += 1
        return log


def engine_log(result, program: Program):
    """Same shape as :meth:`ReferenceTVM.run`, from a run with ``record_slots``."""
    out = []
    for t in result.traces:
        labels = Counter()
        for _, name, args in t.slots:
            labels[(name, tuple(args)) if program.label is None else program.label(name, tuple(args))] += 1
        out.append((t.cen, labels))
    return out
