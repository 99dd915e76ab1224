# cython: language_level=3, boundscheck=False, wraparound=False
"""Bit-parallel truth-table evaluation, 64 assignments per step.

A program is a flattened postfix sequence of (opcode, argument) pairs:
0 LOAD atom, 1 FALSE, 2 TRUE, 3 NOT, 4 AND, 5 OR, 6 IMP.  Assignment a
makes atom i true iff bit i of a is set.
"""

from libc.stdlib cimport free, malloc


def falsifying(long long[::1] program, int n_atoms):
    """Index of some falsifying assignment, or None for a tautology."""
    if n_atoms < 0 or n_atoms > 32:
        raise ValueError("atom count out of range for the compiled kernel")
    if program.shape[0] % 2 != 0:
        raise ValueError("malformed program")

    cdef unsigned long long full = 0xFFFFFFFFFFFFFFFFULL
    cdef unsigned long long pat[6]
    pat[0] = 0xAAAAAAAAAAAAAAAAULL
    pat[1] = 0xCCCCCCCCCCCCCCCCULL
    pat[2] = 0xF0F0F0F0F0F0F0F0ULL
    pat[3] = 0xFF00FF00FF00FF00ULL
    pat[4] = 0xFFFF0000FFFF0000ULL
    pat[5] = 0xFFFFFFFF00000000ULL

    cdef Py_ssize_t n_ops = program.shape[0] // 2
    if n_ops == 0:
        raise ValueError("empty program")
    cdef unsigned long long *stack = <unsigned long long *> malloc(
        n_ops * sizeof(unsigned long long))
    if stack == NULL:
        raise MemoryError()

    cdef unsigned long long total = (<unsigned long long> 1) << n_atoms
    cdef unsigned long long base = 0
    cdef unsigned long long chunk_mask, v, b
    cdef Py_ssize_t sp, k
    cdef int op, arg, bit, chunk_bits

    try:
        while base < total:
            if total - base >= 64:
                chunk_bits = 64
                chunk_mask = full
            else:
                chunk_bits = <int> (total - base)
                chunk_mask = ((<unsigned long long> 1) << chunk_bits) - 1
            sp = 0
            for k in range(n_ops):
                op = <int> program[2 * k]
                arg = <int> program[2 * k + 1]
                if op == 0:
                    if arg < 6:
                        v = pat[arg]
                    else:
                        v = full if (base >> arg) & 1 else 0
                    stack[sp] = v
                    sp += 1
                elif op == 1:
                    stack[sp] = 0
                    sp += 1
                elif op == 2:
                    stack[sp] = full
                    sp += 1
                elif op == 3:
                    stack[sp - 1] = ~stack[sp - 1]
                elif op == 4:
                    b = stack[sp - 1]
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] & b
                elif op == 5:
                    b = stack[sp - 1]
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] | b
                elif op == 6:
                    b = stack[sp - 1]
                    sp -= 1
                    stack[sp - 1] = (~stack[sp - 1]) | b
                else:
                    raise ValueError(f"bad opcode {op}")
            if sp != 1:
                raise ValueError("malformed program")
            v = stack[0] & chunk_mask
            if v != chunk_mask:
                for bit in range(chunk_bits):
                    if not (v >> bit) & 1:
                        return <object> (base + bit)
            base += 64
    finally:
        free(stack)
    return None
