# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled step kernel: a line-for-line transcription of pure.py.

Must execute the identical sequence of IEEE double operations as the pure
backend (same expression forms, same order, same libm calls) so results are
bit-identical; the build disables FP contraction for that reason.  Edit
pure.py first, then mirror the change here.
"""

import numpy as np

from libc.math cimport exp, fabs, isfinite, sqrt

BACKEND = "fast"

DEF MAX_PTS = 64

STATUS_HORIZON = 0
STATUS_ALL_ARRIVED = 1
STATUS_CONTRACT = 2
STATUS_NONFINITE = 3


cdef void _propagate(double t_k, double g_k, double v_k, double t, double b,
                     double[::1] pt, double[::1] pv, Py_ssize_t n_seg,
                     double* g_out, double* v_out) noexcept:
    # Mirrors etcoord.etc.propagate_scalar.
    cdef Py_ssize_t seg = n_seg - 1
    cdef Py_ssize_t z
    cdef double g, v, tc, te, c, d, decay
    for z in range(n_seg):
        if pt[z] > t_k:
            seg = z - 1
            break
    g = g_k
    v = v_k
    tc = t_k
    while True:
        if seg + 1 < n_seg and pt[seg + 1] < t:
            te = pt[seg + 1]
        else:
            te = t
        c = pv[seg]
        d = te - tc
        if d > 0.0:
            decay = exp(-b * d)
            g = g + c * d + (v - c) * (1.0 - decay) / b
            v = c + (v - c) * decay
        tc = te
        if te >= t:
            break
        seg += 1
    g_out[0] = g
    v_out[0] = v


def simulate(
    int n,
    int[::1] nbr_ptr,
    int[::1] nbr_idx,
    double[:, :, ::1] ctrl,
    int[::1] deg,
    double t_f,
    double a,
    double b,
    double k_pf,
    double eta,
    double c1,
    double c2,
    double c3,
    double[::1] pace_t,
    double[::1] pace_v,
    double k_p,
    double v_min,
    double v_max,
    double rho,
    int[::1] dist_agent,
    double[::1] dist_t0,
    double[::1] dist_t1,
    double[:, ::1] dist_vel,
    double[::1] gamma0,
    double[::1] gamma_dot0,
    double[:, ::1] p0,
    double dt,
    Py_ssize_t n_steps,
    bint continuous,
    bint log_events,
    double[:, ::1] out_gamma,
    double[:, ::1] out_gamma_dot,
    double[:, ::1] out_alpha,
    double[:, ::1] out_accel,
    double[:, :, ::1] out_pos,
    double[:, ::1] out_epf,
    double[::1] out_xi,
    double[::1] out_gap,
    double[::1] ev_t,
    int[::1] ev_agent,
    int[::1] ev_k,
    double[::1] ev_gamma,
    double[::1] ev_gamma_dot,
    double[::1] arrival,
):
    cdef Py_ssize_t n_seg = pace_t.shape[0]
    cdef Py_ssize_t nd = dist_agent.shape[0]

    scratch = np.empty((14, n), dtype=np.float64)
    cdef double[:, ::1] st = scratch
    cdef double[::1] gamma = st[0]
    cdef double[::1] gamma_dot = st[1]
    cdef double[::1] px = st[2]
    cdef double[::1] py = st[3]
    cdef double[::1] pz = st[4]
    cdef double[::1] est_t = st[5]
    cdef double[::1] est_g = st[6]
    cdef double[::1] est_v = st[7]
    cdef double[::1] ghat = st[8]
    cdef double[::1] alpha_row = st[9]
    cdef double[::1] accel_raw = st[10]
    cdef double[::1] new_px = st[11]
    cdef double[::1] new_py = st[12]
    cdef double[::1] new_pz = st[13]
    iscratch = np.zeros((2, n), dtype=np.int32)
    cdef int[:, ::1] ist = iscratch
    cdef int[::1] done = ist[0]
    cdef int[::1] kcount = ist[1]

    cdef double wx[MAX_PTS]
    cdef double wy[MAX_PTS]
    cdef double wz[MAX_PTS]

    cdef Py_ssize_t i, z, lvl, s, m
    cdef Py_ssize_t n_events = 0
    cdef Py_ssize_t rows = 0
    cdef int status = STATUS_HORIZON
    cdef int status_agent = 0
    cdef int contract_agent
    cdef bint nonfinite, alldone
    cdef Py_ssize_t seg
    cdef double t, g_, v_, h, e, gdd, u, vv, tx, ty, tz, md, dx, dy, dz
    cdef double ex, ey, ez, epf, dnorm, alf, ssum, acc
    cdef double cmdx, cmdy, cmdz, sp, sc
    cdef double s1, gmin, gmax, x2, gi, dv, qq, xin, gmean, dg
    cdef double v_new, g_new, epf_i, acc_rec

    for i in range(n):
        gamma[i] = gamma0[i]
        gamma_dot[i] = gamma_dot0[i]
        px[i] = p0[i, 0]
        py[i] = p0[i, 1]
        pz[i] = p0[i, 2]
        est_t[i] = 0.0
        est_g[i] = gamma0[i]
        est_v[i] = gamma_dot0[i]

    if log_events:
        for i in range(n):
            ev_t[n_events] = 0.0
            ev_agent[n_events] = i + 1
            ev_k[n_events] = 0
            ev_gamma[n_events] = gamma[i]
            ev_gamma_dot[n_events] = gamma_dot[i]
            n_events += 1

    s = 0
    while True:
        t = s * dt

        # -- phase 1: propagate replicas ---------------------------------
        for i in range(n):
            _propagate(est_t[i], est_g[i], est_v[i], t, b, pace_t, pace_v, n_seg, &g_, &v_)
            ghat[i] = g_

        # -- phase 2: triggers, ascending agent order --------------------
        h = c1 + c2 * exp(-c3 * t)
        for i in range(n):
            e = ghat[i] - gamma[i]
            if (continuous and s > 0) or (fabs(e) - h > 0.0):
                kcount[i] += 1
                if log_events:
                    ev_t[n_events] = t
                    ev_agent[n_events] = i + 1
                    ev_k[n_events] = kcount[i]
                    ev_gamma[n_events] = gamma[i]
                    ev_gamma_dot[n_events] = gamma_dot[i]
                    n_events += 1
                est_t[i] = t
                est_g[i] = gamma[i]
                est_v[i] = gamma_dot[i]
                ghat[i] = gamma[i]

        # -- phase 3: snapshot computations ------------------------------
        seg = n_seg - 1
        for z in range(n_seg):
            if pace_t[z] > t:
                seg = z - 1
                break
        gdd = pace_v[seg]

        contract_agent = -1
        nonfinite = False
        for i in range(n):
            u = gamma[i] / t_f
            m = deg[i]
            for z in range(m + 1):
                wx[z] = ctrl[i, z, 0]
                wy[z] = ctrl[i, z, 1]
                wz[z] = ctrl[i, z, 2]
            vv = 1.0 - u
            for lvl in range(m - 1):
                for z in range(m - lvl):
                    wx[z] = vv * wx[z] + u * wx[z + 1]
                    wy[z] = vv * wy[z] + u * wy[z + 1]
                    wz[z] = vv * wz[z] + u * wz[z + 1]
            tx = vv * wx[0] + u * wx[1]
            ty = vv * wy[0] + u * wy[1]
            tz = vv * wz[0] + u * wz[1]
            md = <double> m
            dx = md * (wx[1] - wx[0]) / t_f
            dy = md * (wy[1] - wy[0]) / t_f
            dz = md * (wz[1] - wz[0]) / t_f

            ex = px[i] - tx
            ey = py[i] - ty
            ez = pz[i] - tz
            epf = sqrt(ex * ex + ey * ey + ez * ez)
            dnorm = sqrt(dx * dx + dy * dy + dz * dz)
            alf = k_pf * (dx * ex + dy * ey + dz * ez) / (dnorm + eta)

            ssum = 0.0
            for z in range(nbr_ptr[i], nbr_ptr[i + 1]):
                ssum += gamma[i] - ghat[nbr_idx[z]]
            acc = -b * (gamma_dot[i] - gdd) - a * ssum + alf

            alpha_row[i] = alf
            accel_raw[i] = acc
            if done[i]:
                acc_rec = 0.0
            else:
                acc_rec = acc
            out_accel[s, i] = acc_rec
            out_epf[s, i] = epf
            if epf - rho > 0.0 and contract_agent < 0:
                contract_agent = i
            if not (isfinite(acc) and isfinite(epf)):
                nonfinite = True
                if status_agent == 0:
                    status_agent = i + 1

            cmdx = dx * gamma_dot[i] - k_p * ex
            cmdy = dy * gamma_dot[i] - k_p * ey
            cmdz = dz * gamma_dot[i] - k_p * ez
            for z in range(nd):
                if dist_agent[z] == i and dist_t0[z] <= t and t < dist_t1[z]:
                    cmdx += dist_vel[z, 0]
                    cmdy += dist_vel[z, 1]
                    cmdz += dist_vel[z, 2]
            sp = sqrt(cmdx * cmdx + cmdy * cmdy + cmdz * cmdz)
            if sp > v_max:
                sc = v_max / sp
                cmdx *= sc
                cmdy *= sc
                cmdz *= sc
            elif 0.0 < sp and sp < v_min:
                sc = v_min / sp
                cmdx *= sc
                cmdy *= sc
                cmdz *= sc
            new_px[i] = px[i] + dt * cmdx
            new_py[i] = py[i] + dt * cmdy
            new_pz[i] = pz[i] + dt * cmdz

        # -- metrics ------------------------------------------------------
        s1 = 0.0
        gmin = gamma[0]
        gmax = gamma[0]
        x2 = 0.0
        for i in range(n):
            gi = gamma[i]
            s1 += gi
            if gi < gmin:
                gmin = gi
            if gi > gmax:
                gmax = gi
            dv = gamma_dot[i] - gdd
            x2 += dv * dv
        # centered form of ||Q g||^2; mirrors pure.py
        gmean = s1 / n
        qq = 0.0
        for i in range(n):
            dg = gamma[i] - gmean
            qq += dg * dg
        xin = sqrt(qq + x2)

        # -- record row ----------------------------------------------------
        for i in range(n):
            out_gamma[s, i] = gamma[i]
            out_gamma_dot[s, i] = gamma_dot[i]
            out_alpha[s, i] = alpha_row[i]
            out_pos[s, i, 0] = px[i]
            out_pos[s, i, 1] = py[i]
            out_pos[s, i, 2] = pz[i]
        out_xi[s] = xin
        out_gap[s] = gmax - gmin
        rows = s + 1

        # -- termination ---------------------------------------------------
        if nonfinite:
            status = STATUS_NONFINITE
            break
        if contract_agent >= 0:
            status = STATUS_CONTRACT
            status_agent = contract_agent + 1
            break
        alldone = True
        for i in range(n):
            if not done[i]:
                alldone = False
                break
        if alldone:
            status = STATUS_ALL_ARRIVED
            break
        if s == n_steps:
            status = STATUS_HORIZON
            break

        # -- phase 4: commit virtual times ---------------------------------
        for i in range(n):
            if not done[i]:
                v_new = gamma_dot[i] + dt * accel_raw[i]
                g_new = gamma[i] + dt * v_new
                if g_new >= t_f:
                    gamma[i] = t_f
                    gamma_dot[i] = 0.0
                    done[i] = 1
                    arrival[i] = (s + 1) * dt
                else:
                    if g_new < 0.0:
                        g_new = 0.0
                    gamma[i] = g_new
                    gamma_dot[i] = v_new

        # -- phase 5: commit vehicle positions ------------------------------
        for i in range(n):
            px[i] = new_px[i]
            py[i] = new_py[i]
            pz[i] = new_pz[i]

        s += 1

    return rows, n_events, status, status_agent
