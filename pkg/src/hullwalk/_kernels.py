"""Compiled planar (d = 2) stepping kernels.

These are private fast paths; `engine` and `renewal` own the public API and
keep pure-Python references that consume the identical uniform sequences, so
kernel-vs-reference runs are bit-comparable.

Draw layouts (values come sequentially off one replica stream):

* direct sampler: 2 uniforms per step, ``[angle, radius]``; the radius draw
  is present but unused under the sphere law so ball/sphere share a layout.
* rejection sampler: per proposal ``[angle, radius]`` (ball) or ``[angle]``
  (sphere), repeated until acceptance.
* split sampler: per block one regeneration coin; then either a plain block
  (k direct stages, ``[angle, radius]`` each), a corridor block (k
  uniform-in-ball draws, ``[angle, radius]`` each), or residual-rejection
  rounds (one plain-block proposal plus one acceptance uniform whenever the
  proposal lands inside the corridor).

Error protocol: kernels return a status code instead of raising --
OK / REFILL (uniform buffer low; resume after topping up) / DEGENERATE /
STALL / SPLIT_STALL.  Resumable state lives in the ``istate`` int64 array.
"""

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

OK = 0
REFILL = 1
DEGENERATE = 2
STALL = 3
SPLIT_STALL = 4

PROPOSAL_CAP = 64
RESIDUAL_CAP = 1_000_000

# istate slots
I_CURSOR = 0     # next unread index in the uniform buffer
I_STEP = 1       # next local step (plain kernels) / next block (split)
I_WLEN = 2       # current window fill
I_NGLOBAL = 3    # global index of the current position
I_PROPS = 4      # total proposals used so far
I_PHASE = 5      # split: 0 = block start, 1 = resuming mid-residual
I_ROUNDS = 6     # split: residual rounds used in the current block
I_NREN = 7       # split: renewals recorded
ISTATE_LEN = 8


@njit(cache=True, nogil=True, inline="always")
def _sector(dx, dy, m, tol):
    """Largest angular gap of m blocked directions: (start, width, ok)."""
    if m == 0:
        return 0.0, TWO_PI, True
    ang = np.empty(m)
    for i in range(m):
        a = math.atan2(dy[i], dx[i])
        if a < 0.0:
            a += TWO_PI
        ang[i] = a
    for i in range(1, m):  # insertion sort; m <= k + 2 stays tiny
        key = ang[i]
        j = i - 1
        while j >= 0 and ang[j] > key:
            ang[j + 1] = ang[j]
            j -= 1
        ang[j + 1] = key
    best = TWO_PI - (ang[m - 1] - ang[0])
    start = ang[m - 1]
    for i in range(m - 1):
        g = ang[i + 1] - ang[i]
        if g > best:
            best = g
            start = ang[i]
    if m > 1 and best < math.pi - tol:
        return start, best, False
    if best > TWO_PI:
        best = TWO_PI
    return start, best, True


@njit(cache=True, nogil=True, inline="always")
def _blocked_dirs(wx, wy, wlen, nglobal, homog, ellx, elly, dx, dy):
    """Unit blocked directions at the current (last) window position.

    The window holds the last ``wlen`` positions, oldest first.  In
    homogeneous mode the start point at global index 0 is not a constraint
    (the origin is replaced by the ``-ell`` ray); in origin mode it
    coincides with the origin constraint anyway.
    """
    cx = wx[wlen - 1]
    cy = wy[wlen - 1]
    first_idx = nglobal - (wlen - 1)
    m = 0
    for i in range(wlen - 1):
        if homog and first_idx + i == 0:
            continue
        vx = wx[i] - cx
        vy = wy[i] - cy
        n = math.sqrt(vx * vx + vy * vy)
        if n > 1e-12:
            dx[m] = vx / n
            dy[m] = vy / n
            m += 1
    if homog:
        dx[m] = -ellx
        dy[m] = -elly
        m += 1
    else:
        n = math.sqrt(cx * cx + cy * cy)
        if n > 1e-12:
            dx[m] = -cx / n
            dy[m] = -cy / n
            m += 1
    return m


@njit(cache=True, nogil=True, inline="always")
def _push(wx, wy, wlen, kcap, x, y):
    if wlen < kcap:
        wx[wlen] = x
        wy[wlen] = y
        return wlen + 1
    for i in range(kcap - 1):
        wx[i] = wx[i + 1]
        wy[i] = wy[i + 1]
    wx[kcap - 1] = x
    wy[kcap - 1] = y
    return kcap


@njit(cache=True, nogil=True)
def walk2d_direct(k, steps, ball, homog, ellx, elly, u, thin,
                  wx, wy, istate,
                  trace_x, trace_theta, trace_prop,
                  rad_sums, rad_counts, stats_window, n0, theta_range):
    """Direct sampler: angle uniform on the admissible arc, exact radius law.

    ``u`` has shape (steps, 2).  Returns OK or DEGENERATE.
    """
    dx = np.empty(k + 2)
    dy = np.empty(k + 2)
    kcap = k + 1
    wlen = int(istate[I_WLEN])
    nglobal = int(istate[I_NGLOBAL])
    for s in range(steps):
        cx = wx[wlen - 1]
        cy = wy[wlen - 1]
        m = _blocked_dirs(wx, wy, wlen, nglobal, homog, ellx, elly, dx, dy)
        start, width, ok = _sector(dx, dy, m, 1e-9)
        if not ok:
            istate[I_STEP] = s
            istate[I_NGLOBAL] = nglobal
            istate[I_PROPS] += s
            return DEGENERATE
        theta = TWO_PI - width
        if theta < theta_range[0]:
            theta_range[0] = theta
        if theta > theta_range[1]:
            theta_range[1] = theta
        if nglobal % thin == 0:
            r = nglobal // thin
            trace_x[r, 0] = cx
            trace_x[r, 1] = cy
            trace_theta[r] = theta
        phi = start + width * u[s, 0]
        rad = math.sqrt(u[s, 1]) if ball else 1.0
        nx = cx + rad * math.cos(phi)
        ny = cy + rad * math.sin(phi)
        cn = math.sqrt(cx * cx + cy * cy)
        rinc = 0.0 if cn <= 1e-12 else ((nx - cx) * cx + (ny - cy) * cy) / cn
        widx = (nglobal - n0) // stats_window
        rad_sums[widx] += rinc
        rad_counts[widx] += 1
        nglobal += 1
        if nglobal % thin == 0:
            trace_prop[nglobal // thin] = 1
        wlen = _push(wx, wy, wlen, kcap, nx, ny)
    if nglobal % thin == 0:
        m = _blocked_dirs(wx, wy, wlen, nglobal, homog, ellx, elly, dx, dy)
        start, width, ok = _sector(dx, dy, m, 1e-9)
        r = nglobal // thin
        trace_x[r, 0] = wx[wlen - 1]
        trace_x[r, 1] = wy[wlen - 1]
        trace_theta[r] = TWO_PI - width if ok else np.nan
    istate[I_WLEN] = wlen
    istate[I_NGLOBAL] = nglobal
    istate[I_STEP] = steps
    istate[I_PROPS] += steps
    return OK


@njit(cache=True, nogil=True)
def walk2d_reject(k, steps, ball, homog, ellx, elly, buf, thin,
                  wx, wy, istate,
                  trace_x, trace_theta, trace_prop,
                  rad_sums, rad_counts, stats_window, n0, theta_range):
    """Rejection sampler: uniform ball/sphere proposals filtered by the arc.

    Consumes the flat buffer from ``istate[I_CURSOR]``; returns REFILL when
    fewer than one worst-case step of draws remains (resume after refill).
    """
    dx = np.empty(k + 2)
    dy = np.empty(k + 2)
    kcap = k + 1
    per_prop = 2 if ball else 1
    need = PROPOSAL_CAP * per_prop
    wlen = int(istate[I_WLEN])
    nglobal = int(istate[I_NGLOBAL])
    c = int(istate[I_CURSOR])
    s = int(istate[I_STEP])
    while s < steps:
        if buf.shape[0] - c < need:
            istate[I_CURSOR] = c
            istate[I_STEP] = s
            istate[I_WLEN] = wlen
            istate[I_NGLOBAL] = nglobal
            return REFILL
        cx = wx[wlen - 1]
        cy = wy[wlen - 1]
        m = _blocked_dirs(wx, wy, wlen, nglobal, homog, ellx, elly, dx, dy)
        start, width, ok = _sector(dx, dy, m, 1e-9)
        if not ok:
            istate[I_CURSOR] = c
            istate[I_STEP] = s
            istate[I_NGLOBAL] = nglobal
            return DEGENERATE
        theta = TWO_PI - width
        if theta < theta_range[0]:
            theta_range[0] = theta
        if theta > theta_range[1]:
            theta_range[1] = theta
        if nglobal % thin == 0:
            r = nglobal // thin
            trace_x[r, 0] = cx
            trace_x[r, 1] = cy
            trace_theta[r] = theta
        props = 0
        nx = 0.0
        ny = 0.0
        accepted = False
        while props < PROPOSAL_CAP:
            phi = TWO_PI * buf[c]
            c += 1
            rad = 1.0
            if ball:
                rad = math.sqrt(buf[c])
                c += 1
            props += 1
            t = phi - start
            while t < 0.0:
                t += TWO_PI
            while t >= TWO_PI:
                t -= TWO_PI
            if t <= width:
                nx = cx + rad * math.cos(phi)
                ny = cy + rad * math.sin(phi)
                accepted = True
                break
        istate[I_PROPS] += props
        if not accepted:
            istate[I_CURSOR] = c
            istate[I_STEP] = s
            istate[I_NGLOBAL] = nglobal
            return STALL
        cn = math.sqrt(cx * cx + cy * cy)
        rinc = 0.0 if cn <= 1e-12 else ((nx - cx) * cx + (ny - cy) * cy) / cn
        widx = (nglobal - n0) // stats_window
        rad_sums[widx] += rinc
        rad_counts[widx] += 1
        nglobal += 1
        if nglobal % thin == 0:
            trace_prop[nglobal // thin] = props
        wlen = _push(wx, wy, wlen, kcap, nx, ny)
        s += 1
    if nglobal % thin == 0:
        m = _blocked_dirs(wx, wy, wlen, nglobal, homog, ellx, elly, dx, dy)
        start, width, ok = _sector(dx, dy, m, 1e-9)
        r = nglobal // thin
        trace_x[r, 0] = wx[wlen - 1]
        trace_x[r, 1] = wy[wlen - 1]
        trace_theta[r] = TWO_PI - width if ok else np.nan
    istate[I_CURSOR] = c
    istate[I_STEP] = s
    istate[I_WLEN] = wlen
    istate[I_NGLOBAL] = nglobal
    return OK


@njit(cache=True, nogil=True, inline="always")
def _good_geometry_margins(wx, wy, kcap, homog, ellx, elly, delta):
    """Conservative corridor check on a full window (length k+1).

    True only if, at every corridor stage i, each constraint point sits at
    least 2*delta behind the stage centre along the corridor direction
    (earlier corridor balls inflated by delta) while the next ball clears
    +2*delta ahead.  Sound but not complete.
    """
    k = kcap - 1
    x = wx[k]
    y = wy[k]
    n = math.sqrt(x * x + y * y)
    if n <= 1e-12:
        return False
    if homog:
        ux = ellx
        uy = elly
    else:
        ux = x / n
        uy = y / n
    if 0.5 - 2.0 * delta < 2.0 * delta:
        return False
    for i in range(k):
        cix = x + 0.5 * i * ux
        ciy = y + 0.5 * i * uy
        for j in range(i, kcap):
            if i == 0 and j == k:
                continue  # stage-0 apex is the walker itself
            if ((wx[j] - cix) * ux + (wy[j] - ciy) * uy) > -2.0 * delta:
                return False
        if not homog:
            if ((0.0 - cix) * ux + (0.0 - ciy) * uy) > -2.0 * delta:
                return False
        for j in range(1, i):
            cjx = x + 0.5 * j * ux
            cjy = y + 0.5 * j * uy
            if ((cjx - cix) * ux + (cjy - ciy) * uy) + delta > -2.0 * delta:
                return False
    return True


@njit(cache=True, nogil=True, inline="always")
def _propose_block(wx, wy, kcap, nglobal, homog, ellx, elly, buf, c, delta,
                   ux, uy, x0, y0, tx, ty,
                   stage_theta, stage_rinc, dx, dy):
    """One plain-block proposal into the scratch window tx/ty.

    Returns (cursor, area_prod, in_corridor, ok).  Consumes 2k uniforms.
    """
    k = kcap - 1
    for i in range(kcap):
        tx[i] = wx[i]
        ty[i] = wy[i]
    area_prod = 1.0
    in_corridor = True
    for i in range(k):
        m = _blocked_dirs(tx, ty, kcap, nglobal + i, homog, ellx, elly, dx, dy)
        start, width, ok = _sector(dx, dy, m, 1e-9)
        if not ok:
            return c, 0.0, False, False
        cx = tx[kcap - 1]
        cy = ty[kcap - 1]
        phi = start + width * buf[c]
        rad = math.sqrt(buf[c + 1])
        c += 2
        nx = cx + rad * math.cos(phi)
        ny = cy + rad * math.sin(phi)
        area_prod *= 0.5 * width
        stage_theta[i] = TWO_PI - width
        cn = math.sqrt(cx * cx + cy * cy)
        stage_rinc[i] = 0.0 if cn <= 1e-12 else ((nx - cx) * cx + (ny - cy) * cy) / cn
        gx = nx - (x0 + 0.5 * (i + 1) * ux)
        gy = ny - (y0 + 0.5 * (i + 1) * uy)
        if gx * gx + gy * gy > delta * delta:
            in_corridor = False
        _push(tx, ty, kcap, kcap, nx, ny)
    return c, area_prod, in_corridor, True


@njit(cache=True, nogil=True)
def split2d(k, blocks, homog, ellx, elly, delta, alpha, buf, thin,
            wx, wy, istate,
            trace_x, trace_theta,
            rad_sums, rad_counts, stats_window, n0,
            ren_tau, ren_anchor, good_count):
    """Regeneration-split sampler over k-step blocks (ball increments).

    Requires a full window (k+1 positions).  Per block: if the conservative
    corridor test fails, advance with a plain block; otherwise flip the
    Bernoulli(alpha) coin and either resample the block uniformly on the
    corridor (a renewal) or draw it from the residual density by rejection.
    """
    dx = np.empty(k + 2)
    dy = np.empty(k + 2)
    tx = np.empty(k + 1)
    ty = np.empty(k + 1)
    stage_theta = np.empty(k)
    stage_rinc = np.empty(k)
    kcap = k + 1
    ball_vol = (math.pi * delta * delta) ** k
    block_need = 1 + (2 * k + 1)
    c = int(istate[I_CURSOR])
    m = int(istate[I_STEP])
    nglobal = int(istate[I_NGLOBAL])
    nren = int(istate[I_NREN])
    phase = int(istate[I_PHASE])
    rounds = int(istate[I_ROUNDS])

    while m < blocks:
        if buf.shape[0] - c < block_need:
            istate[I_CURSOR] = c
            istate[I_STEP] = m
            istate[I_NGLOBAL] = nglobal
            istate[I_NREN] = nren
            istate[I_PHASE] = phase
            istate[I_ROUNDS] = rounds
            return REFILL
        x0 = wx[k]
        y0 = wy[k]
        nrm = math.sqrt(x0 * x0 + y0 * y0)
        if homog:
            ux = ellx
            uy = elly
        else:
            ux = x0 / nrm if nrm > 1e-12 else 0.0
            uy = y0 / nrm if nrm > 1e-12 else 0.0
        if phase == 0:
            good = _good_geometry_margins(wx, wy, kcap, homog, ellx, elly, delta)
            if good:
                good_count[0] += 1
            v = buf[c] < alpha
            c += 1
        else:  # resuming mid-residual after a refill
            good = True
            v = False

        if good and v:
            # regeneration: record, then draw the block uniformly on the corridor
            ren_tau[nren] = m
            ren_anchor[nren, 0] = x0
            ren_anchor[nren, 1] = y0
            nren += 1
            for i in range(1, k + 1):
                mm = _blocked_dirs(wx, wy, kcap, nglobal, homog, ellx, elly, dx, dy)
                start, width, ok = _sector(dx, dy, mm, 1e-9)
                cx = wx[kcap - 1]
                cy = wy[kcap - 1]
                if nglobal % thin == 0:
                    r = nglobal // thin
                    trace_x[r, 0] = cx
                    trace_x[r, 1] = cy
                    trace_theta[r] = TWO_PI - width if ok else np.nan
                phi = TWO_PI * buf[c]
                rad = delta * math.sqrt(buf[c + 1])
                c += 2
                nx = x0 + 0.5 * i * ux + rad * math.cos(phi)
                ny = y0 + 0.5 * i * uy + rad * math.sin(phi)
                cn = math.sqrt(cx * cx + cy * cy)
                rinc = 0.0 if cn <= 1e-12 else ((nx - cx) * cx + (ny - cy) * cy) / cn
                widx = (nglobal - n0) // stats_window
                rad_sums[widx] += rinc
                rad_counts[widx] += 1
                nglobal += 1
                _push(wx, wy, kcap, kcap, nx, ny)
        elif good:
            # residual density via rejection against the plain block law
            accepted = False
            while rounds < RESIDUAL_CAP:
                if buf.shape[0] - c < 2 * k + 1:
                    istate[I_CURSOR] = c
                    istate[I_STEP] = m
                    istate[I_NGLOBAL] = nglobal
                    istate[I_NREN] = nren
                    istate[I_PHASE] = 1
                    istate[I_ROUNDS] = rounds
                    return REFILL
                rounds += 1
                c, area_prod, in_corridor, ok = _propose_block(
                    wx, wy, kcap, nglobal, homog, ellx, elly, buf, c, delta,
                    ux, uy, x0, y0, tx, ty, stage_theta, stage_rinc, dx, dy)
                if not ok:
                    istate[I_CURSOR] = c
                    istate[I_STEP] = m
                    istate[I_NGLOBAL] = nglobal
                    return DEGENERATE
                if in_corridor:
                    uacc = buf[c]
                    c += 1
                    accepted = uacc < 1.0 - alpha * area_prod / ball_vol
                else:
                    accepted = True
                if accepted:
                    break
            if not accepted:
                istate[I_CURSOR] = c
                istate[I_STEP] = m
                istate[I_NGLOBAL] = nglobal
                return SPLIT_STALL
            # commit: accepted block is tx/ty = (x0, y_1..y_k); log per stage
            for i in range(k):
                cx = x0 if i == 0 else tx[i]
                cy = y0 if i == 0 else ty[i]
                if nglobal % thin == 0:
                    r = nglobal // thin
                    trace_x[r, 0] = cx
                    trace_x[r, 1] = cy
                    trace_theta[r] = stage_theta[i]
                widx = (nglobal - n0) // stats_window
                rad_sums[widx] += stage_rinc[i]
                rad_counts[widx] += 1
                nglobal += 1
            for i in range(kcap):
                wx[i] = tx[i]
                wy[i] = ty[i]
        else:
            # no corridor guarantee: plain block
            c, area_prod, in_corridor, ok = _propose_block(
                wx, wy, kcap, nglobal, homog, ellx, elly, buf, c, delta,
                ux, uy, x0, y0, tx, ty, stage_theta, stage_rinc, dx, dy)
            if not ok:
                istate[I_CURSOR] = c
                istate[I_STEP] = m
                istate[I_NGLOBAL] = nglobal
                return DEGENERATE
            for i in range(k):
                cx = x0 if i == 0 else tx[i]
                cy = y0 if i == 0 else ty[i]
                if nglobal % thin == 0:
                    r = nglobal // thin
                    trace_x[r, 0] = cx
                    trace_x[r, 1] = cy
                    trace_theta[r] = stage_theta[i]
                widx = (nglobal - n0) // stats_window
                rad_sums[widx] += stage_rinc[i]
                rad_counts[widx] += 1
                nglobal += 1
            for i in range(kcap):
                wx[i] = tx[i]
                wy[i] = ty[i]
        m += 1
        phase = 0
        rounds = 0

    if nglobal % thin == 0:
        mm = _blocked_dirs(wx, wy, kcap, nglobal, homog, ellx, elly, dx, dy)
        start, width, ok = _sector(dx, dy, mm, 1e-9)
        r = nglobal // thin
        trace_x[r, 0] = wx[kcap - 1]
        trace_x[r, 1] = wy[kcap - 1]
        trace_theta[r] = TWO_PI - width if ok else np.nan
    istate[I_CURSOR] = c
    istate[I_STEP] = m
    istate[I_NGLOBAL] = nglobal
    istate[I_NREN] = nren
    istate[I_PHASE] = 0
    istate[I_ROUNDS] = 0
    return OK
