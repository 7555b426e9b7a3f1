"""Pure-Python integrator kernel (fallback twin of the compiled extension).

Dormand-Prince 5(4) embedded pair with PI step control and a quartic
dense-output polynomial per accepted step.  The Rossler right-hand side is
inlined and unrolled: this loop is the hot path of the whole package, and
the compiled kernel in _kernels.pyx mirrors it expression for expression
(same IEEE operations in the same order) so the two backends agree
bit-for-bit.  Any edit here must be replicated there.
"""

from __future__ import annotations

from math import sqrt

import numpy as np

BACKEND = "python"

# Dormand-Prince 5(4) tableau (stage times drop out: the field is autonomous)
_A21 = 1.0 / 5.0
_A31 = 3.0 / 40.0
_A32 = 9.0 / 40.0
_A41 = 44.0 / 45.0
_A42 = -56.0 / 15.0
_A43 = 32.0 / 9.0
_A51 = 19372.0 / 6561.0
_A52 = -25360.0 / 2187.0
_A53 = 64448.0 / 6561.0
_A54 = -212.0 / 729.0
_A61 = 9017.0 / 3168.0
_A62 = -355.0 / 33.0
_A63 = 46732.0 / 5247.0
_A64 = 49.0 / 176.0
_A65 = -5103.0 / 18656.0
_A71 = 35.0 / 384.0
_A73 = 500.0 / 1113.0
_A74 = 125.0 / 192.0
_A75 = -2187.0 / 6784.0
_A76 = 11.0 / 84.0
# error = 5th-order minus embedded 4th-order weights
_E1 = 71.0 / 57600.0
_E3 = -71.0 / 16695.0
_E4 = 71.0 / 1920.0
_E5 = -17253.0 / 339200.0
_E6 = 22.0 / 525.0
_E7 = -1.0 / 40.0
# dense-output polynomial (quartic, Hermite at both step ends)
_P11 = 1.0
_P12 = -8048581381.0 / 2820520608.0
_P13 = 8663915743.0 / 2820520608.0
_P14 = -12715105075.0 / 11282082432.0
_P32 = 131558114200.0 / 32700410799.0
_P33 = -68118460800.0 / 10900136933.0
_P34 = 87487479700.0 / 32700410799.0
_P42 = -1754552775.0 / 470086768.0
_P43 = 14199869525.0 / 1410260304.0
_P44 = -10690763975.0 / 1880347072.0
_P52 = 127303824393.0 / 49829197408.0
_P53 = -318862633887.0 / 49829197408.0
_P54 = 701980252875.0 / 199316789632.0
_P62 = -282668133.0 / 205662961.0
_P63 = 2019193451.0 / 616988883.0
_P64 = -1453857185.0 / 822651844.0
_P72 = 40617522.0 / 29380423.0
_P73 = -110615467.0 / 29380423.0
_P74 = 69997945.0 / 29380423.0

_SAFETY = 0.9
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_FAC_MIN_INV = 5.0   # max shrink factor 0.2
_FAC_MAX_INV = 0.1   # max growth factor 10
_H_FLOOR = 1e-14

STATUS_TIME = 0
STATUS_ESCAPE = 1
STATUS_FIXED_POINT = 2
STATUS_UNDERFLOW = 3
STATUS_MAX_STEPS = 4


def integrate_raw(a, b, c, x, y, z, t_final, tol, sign,
                  escape_radius, fp_tol, max_steps, h_fixed):
    """March the (possibly sign-reversed) Rossler field from (x, y, z).

    Returns (status, ts, ys, qs, hs): ts has n+1 entries of elapsed
    parameter, ys the n+1 states, qs the (n,3,4) dense coefficients and hs
    the n accepted step sizes.  With h_fixed > 0 adaptivity is disabled
    (every step accepted at that size; used by convergence studies).
    """
    esc2 = escape_radius * escape_radius
    fp2 = fp_tol * fp_tol

    ts = [0.0]
    xs = [x]
    ys_ = [y]
    zs = [z]
    qs: list[float] = []
    hs: list[float] = []

    k1x = sign * (-y - z)
    k1y = sign * (x + a * y)
    k1z = sign * (b * x + z * (x - c))

    status = STATUS_MAX_STEPS
    if k1x * k1x + k1y * k1y + k1z * k1z < fp2:
        status = STATUS_FIXED_POINT
        return status, _pack(ts, xs, ys_, zs, qs, hs)
    if x * x + y * y + z * z > esc2:
        status = STATUS_ESCAPE
        return status, _pack(ts, xs, ys_, zs, qs, hs)

    # initial step selection (skipped in fixed-step mode)
    if h_fixed > 0.0:
        h = h_fixed
    else:
        sx = tol * (1.0 + abs(x))
        sy = tol * (1.0 + abs(y))
        sz = tol * (1.0 + abs(z))
        rx = x / sx
        ry = y / sy
        rz = z / sz
        d0 = sqrt(rx * rx + ry * ry + rz * rz)
        rx = k1x / sx
        ry = k1y / sy
        rz = k1z / sz
        d1 = sqrt(rx * rx + ry * ry + rz * rz)
        if d0 < 1e-5 or d1 < 1e-5:
            h0 = 1e-6
        else:
            h0 = 0.01 * (d0 / d1)
        xe = x + h0 * k1x
        ye = y + h0 * k1y
        ze = z + h0 * k1z
        f1x = sign * (-ye - ze)
        f1y = sign * (xe + a * ye)
        f1z = sign * (b * xe + ze * (xe - c))
        rx = (f1x - k1x) / sx
        ry = (f1y - k1y) / sy
        rz = (f1z - k1z) / sz
        d2 = sqrt(rx * rx + ry * ry + rz * rz) / h0
        dm = d1 if d1 > d2 else d2
        if dm <= 1e-15:
            h1 = 1e-6 if 1e-6 > h0 * 1e-3 else h0 * 1e-3
        else:
            h1 = (0.01 / dm) ** 0.2
        h = 100.0 * h0
        if h1 < h:
            h = h1
        if h > t_final:
            h = t_final

    t = 0.0
    facold = 1e-4
    last_rejected = False
    last_step = False
    n_steps = 0

    while True:
        if n_steps >= max_steps:
            status = STATUS_MAX_STEPS
            break
        if h < _H_FLOOR:
            status = STATUS_UNDERFLOW
            break
        last_step = t + h >= t_final
        if last_step:
            h = t_final - t

        # stages 2..6
        xe = x + h * (_A21 * k1x)
        ye = y + h * (_A21 * k1y)
        ze = z + h * (_A21 * k1z)
        k2x = sign * (-ye - ze)
        k2y = sign * (xe + a * ye)
        k2z = sign * (b * xe + ze * (xe - c))

        xe = x + h * (_A31 * k1x + _A32 * k2x)
        ye = y + h * (_A31 * k1y + _A32 * k2y)
        ze = z + h * (_A31 * k1z + _A32 * k2z)
        k3x = sign * (-ye - ze)
        k3y = sign * (xe + a * ye)
        k3z = sign * (b * xe + ze * (xe - c))

        xe = x + h * (_A41 * k1x + _A42 * k2x + _A43 * k3x)
        ye = y + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y)
        ze = z + h * (_A41 * k1z + _A42 * k2z + _A43 * k3z)
        k4x = sign * (-ye - ze)
        k4y = sign * (xe + a * ye)
        k4z = sign * (b * xe + ze * (xe - c))

        xe = x + h * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x)
        ye = y + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y)
        ze = z + h * (_A51 * k1z + _A52 * k2z + _A53 * k3z + _A54 * k4z)
        k5x = sign * (-ye - ze)
        k5y = sign * (xe + a * ye)
        k5z = sign * (b * xe + ze * (xe - c))

        xe = x + h * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x)
        ye = y + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y)
        ze = z + h * (_A61 * k1z + _A62 * k2z + _A63 * k3z + _A64 * k4z + _A65 * k5z)
        k6x = sign * (-ye - ze)
        k6y = sign * (xe + a * ye)
        k6z = sign * (b * xe + ze * (xe - c))

        # 5th-order solution (row 7 of the tableau)
        x1 = x + h * (_A71 * k1x + _A73 * k3x + _A74 * k4x + _A75 * k5x + _A76 * k6x)
        y1 = y + h * (_A71 * k1y + _A73 * k3y + _A74 * k4y + _A75 * k5y + _A76 * k6y)
        z1 = z + h * (_A71 * k1z + _A73 * k3z + _A74 * k4z + _A75 * k5z + _A76 * k6z)
        k7x = sign * (-y1 - z1)
        k7y = sign * (x1 + a * y1)
        k7z = sign * (b * x1 + z1 * (x1 - c))

        if h_fixed > 0.0:
            accept = True
            err = 0.0
        else:
            ex = h * (_E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
            ey = h * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
            ez = h * (_E1 * k1z + _E3 * k3z + _E4 * k4z + _E5 * k5z + _E6 * k6z + _E7 * k7z)
            mx = abs(x)
            if abs(x1) > mx:
                mx = abs(x1)
            my = abs(y)
            if abs(y1) > my:
                my = abs(y1)
            mz = abs(z)
            if abs(z1) > mz:
                mz = abs(z1)
            sx = tol * (1.0 + mx)
            sy = tol * (1.0 + my)
            sz = tol * (1.0 + mz)
            rx = ex / sx
            ry = ey / sy
            rz = ez / sz
            err = sqrt((rx * rx + ry * ry + rz * rz) / 3.0)
            accept = err <= 1.0

        if accept:
            # dense coefficients q[i][j]: y(th) = y0 + h * sum_j q[i][j] th^(j+1)
            qs.append(k1x * _P11 + 0.0)
            qs.append(k1x * _P12 + k3x * _P32 + k4x * _P42 + k5x * _P52 + k6x * _P62 + k7x * _P72)
            qs.append(k1x * _P13 + k3x * _P33 + k4x * _P43 + k5x * _P53 + k6x * _P63 + k7x * _P73)
            qs.append(k1x * _P14 + k3x * _P34 + k4x * _P44 + k5x * _P54 + k6x * _P64 + k7x * _P74)
            qs.append(k1y * _P11 + 0.0)
            qs.append(k1y * _P12 + k3y * _P32 + k4y * _P42 + k5y * _P52 + k6y * _P62 + k7y * _P72)
            qs.append(k1y * _P13 + k3y * _P33 + k4y * _P43 + k5y * _P53 + k6y * _P63 + k7y * _P73)
            qs.append(k1y * _P14 + k3y * _P34 + k4y * _P44 + k5y * _P54 + k6y * _P64 + k7y * _P74)
            qs.append(k1z * _P11 + 0.0)
            qs.append(k1z * _P12 + k3z * _P32 + k4z * _P42 + k5z * _P52 + k6z * _P62 + k7z * _P72)
            qs.append(k1z * _P13 + k3z * _P33 + k4z * _P43 + k5z * _P53 + k6z * _P63 + k7z * _P73)
            qs.append(k1z * _P14 + k3z * _P34 + k4z * _P44 + k5z * _P54 + k6z * _P64 + k7z * _P74)
            hs.append(h)
            t = t + h
            ts.append(t)
            x = x1
            y = y1
            z = z1
            xs.append(x)
            ys_.append(y)
            zs.append(z)
            k1x = k7x
            k1y = k7y
            k1z = k7z
            n_steps += 1

            if x * x + y * y + z * z > esc2:
                status = STATUS_ESCAPE
                break
            if k7x * k7x + k7y * k7y + k7z * k7z < fp2:
                status = STATUS_FIXED_POINT
                break
            if last_step:
                status = STATUS_TIME
                break

            if h_fixed <= 0.0:
                if err == 0.0:
                    fac = _FAC_MAX_INV
                else:
                    fac11 = err ** _EXPO
                    fac = fac11 / facold ** _BETA
                    fac = fac / _SAFETY
                    if fac < _FAC_MAX_INV:
                        fac = _FAC_MAX_INV
                    if fac > _FAC_MIN_INV:
                        fac = _FAC_MIN_INV
                if last_rejected and fac < 1.0:
                    fac = 1.0
                h = h / fac
                facold = err if err > 1e-4 else 1e-4
                last_rejected = False
        else:
            fac11 = err ** _EXPO
            fac = fac11 / _SAFETY
            if fac > _FAC_MIN_INV:
                fac = _FAC_MIN_INV
            h = h / fac
            last_rejected = True

    return status, _pack(ts, xs, ys_, zs, qs, hs)


def _pack(ts, xs, ys_, zs, qs, hs):
    n = len(hs)
    t_arr = np.array(ts)
    y_arr = np.empty((n + 1, 3))
    y_arr[:, 0] = xs
    y_arr[:, 1] = ys_
    y_arr[:, 2] = zs
    q_arr = np.array(qs).reshape(n, 3, 4) if n else np.empty((0, 3, 4))
    h_arr = np.array(hs)
    return t_arr, y_arr, q_arr, h_arr
