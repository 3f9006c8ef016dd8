# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled transition kernel; semantics mirror ``_kernel_py`` exactly.

State sets arrive and leave as Python ints and are unpacked into byte
buffers for the C loops.  The BFS work stack is bounded by the state
count, since a state enters it at most once per closure.
"""

from cpython.mem cimport PyMem_Free, PyMem_Malloc

from libc.string cimport memset


cdef inline bint _get(const unsigned char* bits, int i) noexcept nogil:
    return (bits[i >> 3] >> (i & 7)) & 1


cdef inline void _set(unsigned char* bits, int i) noexcept nogil:
    bits[i >> 3] |= <unsigned char> (1 << (i & 7))


cdef void _closure_raw(unsigned char* bits, const int[::1] off,
                       const int[::1] dst, int k, int* stack) noexcept nogil:
    cdef int top = 0, s, j, d
    for s in range(k):
        if _get(bits, s):
            stack[top] = s
            top += 1
    while top:
        top -= 1
        s = stack[top]
        for j in range(off[s], off[s + 1]):
            d = dst[j]
            if not _get(bits, d):
                _set(bits, d)
                stack[top] = d
                top += 1


cdef void _move_raw(const unsigned char* src_bits, unsigned char* dst_bits,
                    const int[::1] srcs, const int[::1] dsts) noexcept nogil:
    cdef Py_ssize_t i, n = srcs.shape[0]
    for i in range(n):
        if _get(src_bits, srcs[i]):
            _set(dst_bits, dsts[i])


cdef bint _any_raw(const unsigned char* bits, Py_ssize_t nbytes) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(nbytes):
        if bits[i]:
            return True
    return False


def closure(prog, mask):
    cdef int k = prog.k
    cdef Py_ssize_t nbytes = (k + 7) >> 3
    buf = bytearray(mask.to_bytes(nbytes, "little"))
    cdef unsigned char[::1] bits = buf
    cdef const int[::1] off = prog.eps_off
    cdef const int[::1] dst = prog.eps_dst
    cdef int* stack = <int*> PyMem_Malloc(k * sizeof(int))
    if stack is NULL:
        raise MemoryError
    try:
        _closure_raw(&bits[0], off, dst, k, stack)
    finally:
        PyMem_Free(stack)
    return int.from_bytes(buf, "little")


def step(prog, mask, sym):
    cdef int k = prog.k
    cdef Py_ssize_t nbytes = (k + 7) >> 3
    inbuf = mask.to_bytes(nbytes, "little")
    outbuf = bytearray(nbytes)
    cdef const unsigned char[::1] ib = inbuf
    cdef unsigned char[::1] ob = outbuf
    cdef const int[::1] off = prog.eps_off
    cdef const int[::1] dst = prog.eps_dst
    cdef const int[::1] srcs
    cdef const int[::1] dsts
    entry = prog.by_sym.get(sym)
    if entry is not None:
        srcs = entry[0]
        dsts = entry[1]
        _move_raw(&ib[0], &ob[0], srcs, dsts)
    cdef int* stack = <int*> PyMem_Malloc(k * sizeof(int))
    if stack is NULL:
        raise MemoryError
    try:
        _closure_raw(&ob[0], off, dst, k, stack)
    finally:
        PyMem_Free(stack)
    return int.from_bytes(outbuf, "little")


cdef class _Sweep:
    """Double-buffered sweep state shared by the fused loops."""

    cdef bytearray cur_obj, nxt_obj
    cdef unsigned char* cur
    cdef unsigned char* nxt
    cdef int* stack
    cdef const int[::1] off
    cdef const int[::1] dst
    cdef Py_ssize_t nbytes
    cdef int k
    cdef object by_sym

    def __cinit__(self, prog, mask):
        self.k = prog.k
        self.nbytes = (self.k + 7) >> 3
        self.cur_obj = bytearray(mask.to_bytes(self.nbytes, "little"))
        self.nxt_obj = bytearray(self.nbytes)
        cdef unsigned char[::1] c = self.cur_obj
        cdef unsigned char[::1] x = self.nxt_obj
        self.cur = &c[0]
        self.nxt = &x[0]
        self.off = prog.eps_off
        self.dst = prog.eps_dst
        self.by_sym = prog.by_sym
        self.stack = <int*> PyMem_Malloc(self.k * sizeof(int))
        if self.stack is NULL:
            raise MemoryError

    def __dealloc__(self):
        if self.stack is not NULL:
            PyMem_Free(self.stack)

    cdef bint advance(self, int sym):
        """One transition; returns False once the set is dead."""
        cdef const int[::1] srcs
        cdef const int[::1] dsts
        if not _any_raw(self.cur, self.nbytes):
            return False
        memset(self.nxt, 0, self.nbytes)
        entry = self.by_sym.get(sym)
        if entry is not None:
            srcs = entry[0]
            dsts = entry[1]
            _move_raw(self.cur, self.nxt, srcs, dsts)
        _closure_raw(self.nxt, self.off, self.dst, self.k, self.stack)
        self.cur, self.nxt = self.nxt, self.cur
        self.cur_obj, self.nxt_obj = self.nxt_obj, self.cur_obj
        return True

    cdef object snapshot(self):
        return int.from_bytes(self.cur_obj, "little")


def sweep_final(prog, syms, mask):
    cdef const int[::1] seq = syms
    cdef Py_ssize_t i, n = seq.shape[0]
    cdef _Sweep sw = _Sweep(prog, mask)
    for i in range(n):
        if not sw.advance(seq[i]):
            return 0
    return sw.snapshot()


def sweep_record(prog, syms, mask, w1, w2):
    cdef const int[::1] seq = syms
    cdef Py_ssize_t i, n = seq.shape[0]
    cdef int ww1 = w1, ww2 = w2
    cdef _Sweep sw = _Sweep(prog, mask)
    r1buf = bytearray((n >> 3) + 1)
    r2buf = bytearray((n >> 3) + 1)
    cdef unsigned char[::1] r1 = r1buf
    cdef unsigned char[::1] r2 = r2buf
    cdef bint live = True
    if _get(sw.cur, ww1):
        r1[0] |= 1
    if _get(sw.cur, ww2):
        r2[0] |= 1
    for i in range(n):
        if live:
            live = sw.advance(seq[i])
        if live:
            if _get(sw.cur, ww1):
                _set(&r1[0], <int> (i + 1))
            if _get(sw.cur, ww2):
                _set(&r2[0], <int> (i + 1))
    return int.from_bytes(r1buf, "little"), int.from_bytes(r2buf, "little")


def sweep_record_back(prog, syms, mask, w1, w2):
    cdef const int[::1] seq = syms
    cdef Py_ssize_t i, n = seq.shape[0]
    cdef int ww1 = w1, ww2 = w2
    cdef _Sweep sw = _Sweep(prog, mask)
    r1buf = bytearray((n >> 3) + 1)
    r2buf = bytearray((n >> 3) + 1)
    cdef unsigned char[::1] r1 = r1buf
    cdef unsigned char[::1] r2 = r2buf
    cdef bint live = True
    cdef Py_ssize_t j = 0
    if _get(sw.cur, ww1):
        r1[0] |= 1
    if _get(sw.cur, ww2):
        r2[0] |= 1
    for i in range(n - 1, -1, -1):
        j += 1
        if live:
            live = sw.advance(seq[i])
        if live:
            if _get(sw.cur, ww1):
                _set(&r1[0], <int> j)
            if _get(sw.cur, ww2):
                _set(&r2[0], <int> j)
    return int.from_bytes(r1buf, "little"), int.from_bytes(r2buf, "little")


def sweep_history(prog, syms, mask):
    cdef const int[::1] seq = syms
    cdef Py_ssize_t i, n = seq.shape[0]
    cdef _Sweep sw = _Sweep(prog, mask)
    cdef bint live = True
    out = [sw.snapshot()]
    for i in range(n):
        if live:
            live = sw.advance(seq[i])
        out.append(sw.snapshot() if live else 0)
    return out
