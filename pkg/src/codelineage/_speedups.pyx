# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels; behaviour must match ``_purepy`` exactly."""


cdef inline Py_ssize_t _scan_string(str text, Py_ssize_t start, Py_ssize_t n, bint *closed):
    cdef Py_UCS4 quote = text[start]
    cdef Py_UCS4 ch
    cdef Py_ssize_t j = start + 1
    closed[0] = False
    while j < n:
        ch = text[j]
        if ch == u'\\':
            j += 2
            continue
        if ch == quote:
            closed[0] = True
            return j + 1
        if ch == u'\n':
            return j
        j += 1
    return n


def strip_comments(str text):
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0, seg = 0, j, k, lines
    cdef Py_UCS4 ch, nxt
    cdef bint closed
    cdef bint unterminated = False
    out = []
    while i < n:
        ch = text[i]
        if ch == u'"' or ch == u"'":
            i = _scan_string(text, i, n, &closed)
            continue
        if ch != u'/' or i + 1 >= n:
            i += 1
            continue
        nxt = text[i + 1]
        if nxt == u'/':
            out.append(text[seg:i])
            j = i + 2
            while j < n and text[j] != u'\n':
                j += 1
            i = j
            seg = i
        elif nxt == u'*':
            out.append(text[seg:i])
            j = i + 2
            lines = 0
            while j + 1 < n and not (text[j] == u'*' and text[j + 1] == u'/'):
                if text[j] == u'\n':
                    lines += 1
                j += 1
            if j + 1 >= n:
                unterminated = True
                out.append(u"\n" * text.count(u"\n", i))
                i = n
            else:
                out.append(u"\n" * lines if lines else u" ")
                i = j + 2
            seg = i
        else:
            i += 1
    out.append(text[seg:n])
    return u"".join(out), unterminated


def mask_strings(str text):
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0, seg = 0, end, body_end, k
    cdef Py_UCS4 ch
    cdef bint closed
    out = []
    while i < n:
        ch = text[i]
        if ch != u'"' and ch != u"'":
            i += 1
            continue
        out.append(text[seg:i + 1])
        end = _scan_string(text, i, n, &closed)
        body_end = end - 1 if closed else end
        if body_end > n:
            body_end = n
        for k in range(i + 1, body_end):
            out.append(u"\n" if text[k] == u'\n' else u" ")
        seg = body_end
        i = end
    out.append(text[seg:n])
    return u"".join(out)


def match_brace(str text, Py_ssize_t open_index):
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = open_index
    cdef Py_ssize_t depth = 0
    cdef Py_UCS4 ch
    cdef bint closed
    while i < n:
        ch = text[i]
        if ch == u'{':
            depth += 1
        elif ch == u'}':
            depth -= 1
            if depth == 0:
                return i
            if depth < 0:
                return -1
        elif ch == u'"' or ch == u"'":
            i = _scan_string(text, i, n, &closed)
            continue
        i += 1
    return -1


def accumulate_matches(const long long[:] src_ids, const long long[:] src_counts,
                       const long long[:] indptr, const long long[:] indices,
                       long long[:] out):
    cdef Py_ssize_t k, p
    cdef long long h, c
    with nogil:
        for k in range(src_ids.shape[0]):
            h = src_ids[k]
            c = src_counts[k]
            for p in range(indptr[h], indptr[h + 1]):
                out[indices[p]] += c
