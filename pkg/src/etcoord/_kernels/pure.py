"""Pure-Python step kernel: the reference implementation of the run loop.

The compiled kernel (_fast.pyx) is a line-for-line transcription of this
module.  Both must execute the identical sequence of IEEE double operations:
same expression forms, same evaluation order, same library calls (exp/sqrt),
so their outputs are bit-identical and the selected backend is purely a
speed choice.  Any edit here must be mirrored there.

Step pipeline, per boundary t = s*dt (all phase-3 reads are from the
committed snapshot at t, so per-agent order inside a phase cannot matter):

  1. propagate every agent's shared estimator replica to t
  2. trigger checks against h(t), events fired in ascending agent order,
     replicas reset to the transmitted true state
  3. per agent: trajectory point/slope, path error, virtual-time coupling,
     consensus acceleration, and the vehicle's commanded velocity
  4. record the row; stop on contract violation / non-finite state /
     all-arrived / end of horizon
  5. commit virtual times (semi-implicit Euler, clamp to [0, t_f], freeze on
     arrival with the rate zeroed) and vehicle positions (explicit Euler)
"""

from __future__ import annotations

from math import exp, isfinite, sqrt

from ..etc import propagate_scalar

BACKEND = "pure"

STATUS_HORIZON = 0        # ran to t_end
STATUS_ALL_ARRIVED = 1    # every agent reached t_f early
STATUS_CONTRACT = 2       # a path error exceeded rho
STATUS_NONFINITE = 3      # numerical blow-up


def simulate(
    n,
    nbr_ptr,
    nbr_idx,
    ctrl,
    deg,
    t_f,
    a,
    b,
    k_pf,
    eta,
    c1,
    c2,
    c3,
    pace_t,
    pace_v,
    k_p,
    v_min,
    v_max,
    rho,
    dist_agent,
    dist_t0,
    dist_t1,
    dist_vel,
    gamma0,
    gamma_dot0,
    p0,
    dt,
    n_steps,
    continuous,
    log_events,
    out_gamma,
    out_gamma_dot,
    out_alpha,
    out_accel,
    out_pos,
    out_epf,
    out_xi,
    out_gap,
    ev_t,
    ev_agent,
    ev_k,
    ev_gamma,
    ev_gamma_dot,
    arrival,
):
    # Mirror all inputs into plain Python containers; ndarray indexing inside
    # the hot loop would dominate the runtime of this backend.
    ptr = [int(x) for x in nbr_ptr]
    nbr = [int(x) for x in nbr_idx]
    degs = [int(x) for x in deg]
    cx = [[float(ctrl[i, z, 0]) for z in range(degs[i] + 1)] for i in range(n)]
    cy = [[float(ctrl[i, z, 1]) for z in range(degs[i] + 1)] for i in range(n)]
    cz = [[float(ctrl[i, z, 2]) for z in range(degs[i] + 1)] for i in range(n)]
    pt = [float(x) for x in pace_t]
    pv = [float(x) for x in pace_v]
    n_seg = len(pt)
    nd = len(dist_agent)
    d_agent = [int(x) for x in dist_agent]
    d_t0 = [float(x) for x in dist_t0]
    d_t1 = [float(x) for x in dist_t1]
    d_vx = [float(dist_vel[z, 0]) for z in range(nd)]
    d_vy = [float(dist_vel[z, 1]) for z in range(nd)]
    d_vz = [float(dist_vel[z, 2]) for z in range(nd)]

    gamma = [float(x) for x in gamma0]
    gamma_dot = [float(x) for x in gamma_dot0]
    px = [float(p0[i, 0]) for i in range(n)]
    py = [float(p0[i, 1]) for i in range(n)]
    pz = [float(p0[i, 2]) for i in range(n)]

    done = [False] * n
    est_t = [0.0] * n
    est_g = list(gamma)
    est_v = list(gamma_dot)
    kcount = [0] * n
    ghat = [0.0] * n
    alpha_row = [0.0] * n
    accel_row = [0.0] * n
    accel_raw = [0.0] * n
    epf_row = [0.0] * n
    new_px = [0.0] * n
    new_py = [0.0] * n
    new_pz = [0.0] * n
    maxdeg = max(degs)
    wx = [0.0] * (maxdeg + 1)
    wy = [0.0] * (maxdeg + 1)
    wz = [0.0] * (maxdeg + 1)

    n_events = 0
    # Initial broadcast: every agent transmits its true state at t = 0 so all
    # replicas start from event data (event index 0).
    if log_events:
        for i in range(n):
            ev_t[n_events] = 0.0
            ev_agent[n_events] = i + 1
            ev_k[n_events] = 0
            ev_gamma[n_events] = gamma[i]
            ev_gamma_dot[n_events] = gamma_dot[i]
            n_events += 1

    status = STATUS_HORIZON
    status_agent = 0
    rows = 0
    s = 0
    while True:
        t = s * dt

        # -- phase 1: propagate replicas ---------------------------------
        for i in range(n):
            g_, v_ = propagate_scalar(est_t[i], est_g[i], est_v[i], t, b, pt, pv)
            ghat[i] = g_
            # v_ feeds nothing downstream of a reset; ghat alone drives the
            # coupling, so the propagated rate is dropped here.

        # -- phase 2: triggers, ascending agent order --------------------
        h = c1 + c2 * exp(-c3 * t)
        for i in range(n):
            e = ghat[i] - gamma[i]
            if (continuous and s > 0) or (abs(e) - h > 0.0):
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
            if pt[z] > t:
                seg = z - 1
                break
        gdd = pv[seg]

        contract_agent = -1
        nonfinite = False
        for i in range(n):
            u = gamma[i] / t_f
            m = degs[i]
            cxi = cx[i]
            cyi = cy[i]
            czi = cz[i]
            for z in range(m + 1):
                wx[z] = cxi[z]
                wy[z] = cyi[z]
                wz[z] = czi[z]
            vv = 1.0 - u
            for lvl in range(m - 1):
                for z in range(m - lvl):
                    wx[z] = vv * wx[z] + u * wx[z + 1]
                    wy[z] = vv * wy[z] + u * wy[z + 1]
                    wz[z] = vv * wz[z] + u * wz[z + 1]
            tx = vv * wx[0] + u * wx[1]
            ty = vv * wy[0] + u * wy[1]
            tz = vv * wz[0] + u * wz[1]
            md = float(m)
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
            for z in range(ptr[i], ptr[i + 1]):
                ssum += gamma[i] - ghat[nbr[z]]
            acc = -b * (gamma_dot[i] - gdd) - a * ssum + alf

            alpha_row[i] = alf
            accel_raw[i] = acc
            accel_row[i] = 0.0 if done[i] else acc
            epf_row[i] = epf
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
                if d_agent[z] == i and d_t0[z] <= t and t < d_t1[z]:
                    cmdx += d_vx[z]
                    cmdy += d_vy[z]
                    cmdz += d_vz[z]
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
        # ||Q g||^2 = sum (g - mean)^2: the disagreement projection is
        # orthonormal with the all-ones direction as null space.  Centered
        # form, not sum(g^2) - (sum g)^2/n, which cancels catastrophically
        # near consensus.
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
            out_accel[s, i] = accel_row[i]
            out_pos[s, i, 0] = px[i]
            out_pos[s, i, 1] = py[i]
            out_pos[s, i, 2] = pz[i]
            out_epf[s, i] = epf_row[i]
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
        # Arrival stamps use (s+1)*dt, the exact value of the next grid row,
        # not t+dt (one rounding step apart for some s).
        for i in range(n):
            if not done[i]:
                v_new = gamma_dot[i] + dt * accel_raw[i]
                g_new = gamma[i] + dt * v_new
                if g_new >= t_f:
                    gamma[i] = t_f
                    gamma_dot[i] = 0.0
                    done[i] = True
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
