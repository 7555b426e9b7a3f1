# cython: language_level=3
"""Compiled integrator kernel.

Transliteration of _kernels_py.integrate_raw with C doubles.  The two
kernels must stay expression-for-expression identical (and the extension
is compiled with -ffp-contract=off) so that trajectories agree bit-for-bit
with the pure-Python fallback.  Edit both files together or not at all.
"""

from libc.math cimport fabs, pow, sqrt
from libc.stdlib cimport free, malloc, realloc

import numpy as np

BACKEND = "compiled"

STATUS_TIME = 0
STATUS_ESCAPE = 1
STATUS_FIXED_POINT = 2
STATUS_UNDERFLOW = 3
STATUS_MAX_STEPS = 4

cdef int _ST_TIME = 0
cdef int _ST_ESCAPE = 1
cdef int _ST_FIXED_POINT = 2
cdef int _ST_UNDERFLOW = 3
cdef int _ST_MAX_STEPS = 4

cdef double _A21 = 1.0 / 5.0
cdef double _A31 = 3.0 / 40.0
cdef double _A32 = 9.0 / 40.0
cdef double _A41 = 44.0 / 45.0
cdef double _A42 = -56.0 / 15.0
cdef double _A43 = 32.0 / 9.0
cdef double _A51 = 19372.0 / 6561.0
cdef double _A52 = -25360.0 / 2187.0
cdef double _A53 = 64448.0 / 6561.0
cdef double _A54 = -212.0 / 729.0
cdef double _A61 = 9017.0 / 3168.0
cdef double _A62 = -355.0 / 33.0
cdef double _A63 = 46732.0 / 5247.0
cdef double _A64 = 49.0 / 176.0
cdef double _A65 = -5103.0 / 18656.0
cdef double _A71 = 35.0 / 384.0
cdef double _A73 = 500.0 / 1113.0
cdef double _A74 = 125.0 / 192.0
cdef double _A75 = -2187.0 / 6784.0
cdef double _A76 = 11.0 / 84.0
cdef double _E1 = 71.0 / 57600.0
cdef double _E3 = -71.0 / 16695.0
cdef double _E4 = 71.0 / 1920.0
cdef double _E5 = -17253.0 / 339200.0
cdef double _E6 = 22.0 / 525.0
cdef double _E7 = -1.0 / 40.0
cdef double _P11 = 1.0
cdef double _P12 = -8048581381.0 / 2820520608.0
cdef double _P13 = 8663915743.0 / 2820520608.0
cdef double _P14 = -12715105075.0 / 11282082432.0
cdef double _P32 = 131558114200.0 / 32700410799.0
cdef double _P33 = -68118460800.0 / 10900136933.0
cdef double _P34 = 87487479700.0 / 32700410799.0
cdef double _P42 = -1754552775.0 / 470086768.0
cdef double _P43 = 14199869525.0 / 1410260304.0
cdef double _P44 = -10690763975.0 / 1880347072.0
cdef double _P52 = 127303824393.0 / 49829197408.0
cdef double _P53 = -318862633887.0 / 49829197408.0
cdef double _P54 = 701980252875.0 / 199316789632.0
cdef double _P62 = -282668133.0 / 205662961.0
cdef double _P63 = 2019193451.0 / 616988883.0
cdef double _P64 = -1453857185.0 / 822651844.0
cdef double _P72 = 40617522.0 / 29380423.0
cdef double _P73 = -110615467.0 / 29380423.0
cdef double _P74 = 69997945.0 / 29380423.0

cdef double _SAFETY = 0.9
cdef double _BETA = 0.04
cdef double _EXPO = 0.2 - 0.75 * 0.04
cdef double _FAC_MIN_INV = 5.0
cdef double _FAC_MAX_INV = 0.1
cdef double _H_FLOOR = 1e-14


cdef struct Buf:
    double* data
    size_t n
    size_t cap


cdef int buf_init(Buf* b, size_t cap) nogil:
    b.data = <double*> malloc(cap * sizeof(double))
    b.n = 0
    b.cap = cap
    return 0 if b.data != NULL else -1


cdef int buf_push(Buf* b, double v) nogil:
    cdef double* nd
    if b.n == b.cap:
        nd = <double*> realloc(b.data, 2 * b.cap * sizeof(double))
        if nd == NULL:
            return -1
        b.data = nd
        b.cap = 2 * b.cap
    b.data[b.n] = v
    b.n += 1
    return 0


def integrate_raw(double a, double b, double c,
                  double x, double y, double z,
                  double t_final, double tol, double sign,
                  double escape_radius, double fp_tol,
                  long max_steps, double h_fixed):
    """See _kernels_py.integrate_raw; identical contract and arithmetic."""
    cdef double esc2 = escape_radius * escape_radius
    cdef double fp2 = fp_tol * fp_tol
    cdef Buf ts, xs, ys_, zs, qs, hs
    cdef int status = _ST_MAX_STEPS
    cdef double k1x, k1y, k1z, k2x, k2y, k2z, k3x, k3y, k3z
    cdef double k4x, k4y, k4z, k5x, k5y, k5z, k6x, k6y, k6z, k7x, k7y, k7z
    cdef double xe, ye, ze, x1, y1, z1, ex, ey, ez, rx, ry, rz
    cdef double sx, sy, sz, mx, my, mz, d0, d1, d2, dm, h0, h1
    cdef double h, t, err, facold, fac, fac11, f1x, f1y, f1z
    cdef bint last_rejected = False
    cdef bint last_step = False
    cdef bint accept, oom = False
    cdef long n_steps = 0

    if buf_init(&ts, 1024) or buf_init(&xs, 1024) or buf_init(&ys_, 1024) \
            or buf_init(&zs, 1024) or buf_init(&qs, 4096) or buf_init(&hs, 1024):
        raise MemoryError()

    with nogil:
        buf_push(&ts, 0.0)
        buf_push(&xs, x)
        buf_push(&ys_, y)
        buf_push(&zs, z)

        k1x = sign * (-y - z)
        k1y = sign * (x + a * y)
        k1z = sign * (b * x + z * (x - c))

        if k1x * k1x + k1y * k1y + k1z * k1z < fp2:
            status = _ST_FIXED_POINT
        elif x * x + y * y + z * z > esc2:
            status = _ST_ESCAPE
        else:
            if h_fixed > 0.0:
                h = h_fixed
            else:
                sx = tol * (1.0 + fabs(x))
                sy = tol * (1.0 + fabs(y))
                sz = tol * (1.0 + fabs(z))
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
                    h1 = pow(0.01 / dm, 0.2)
                h = 100.0 * h0
                if h1 < h:
                    h = h1
                if h > t_final:
                    h = t_final

            t = 0.0
            facold = 1e-4

            while True:
                if n_steps >= max_steps:
                    status = _ST_MAX_STEPS
                    break
                if h < _H_FLOOR:
                    status = _ST_UNDERFLOW
                    break
                last_step = t + h >= t_final
                if last_step:
                    h = t_final - t

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
                    mx = fabs(x)
                    if fabs(x1) > mx:
                        mx = fabs(x1)
                    my = fabs(y)
                    if fabs(y1) > my:
                        my = fabs(y1)
                    mz = fabs(z)
                    if fabs(z1) > mz:
                        mz = fabs(z1)
                    sx = tol * (1.0 + mx)
                    sy = tol * (1.0 + my)
                    sz = tol * (1.0 + mz)
                    rx = ex / sx
                    ry = ey / sy
                    rz = ez / sz
                    err = sqrt((rx * rx + ry * ry + rz * rz) / 3.0)
                    accept = err <= 1.0

                if accept:
                    oom |= buf_push(&qs, k1x * _P11 + 0.0) != 0
                    oom |= buf_push(&qs, k1x * _P12 + k3x * _P32 + k4x * _P42 + k5x * _P52 + k6x * _P62 + k7x * _P72) != 0
                    oom |= buf_push(&qs, k1x * _P13 + k3x * _P33 + k4x * _P43 + k5x * _P53 + k6x * _P63 + k7x * _P73) != 0
                    oom |= buf_push(&qs, k1x * _P14 + k3x * _P34 + k4x * _P44 + k5x * _P54 + k6x * _P64 + k7x * _P74) != 0
                    oom |= buf_push(&qs, k1y * _P11 + 0.0) != 0
                    oom |= buf_push(&qs, k1y * _P12 + k3y * _P32 + k4y * _P42 + k5y * _P52 + k6y * _P62 + k7y * _P72) != 0
                    oom |= buf_push(&qs, k1y * _P13 + k3y * _P33 + k4y * _P43 + k5y * _P53 + k6y * _P63 + k7y * _P73) != 0
                    oom |= buf_push(&qs, k1y * _P14 + k3y * _P34 + k4y * _P44 + k5y * _P54 + k6y * _P64 + k7y * _P74) != 0
                    oom |= buf_push(&qs, k1z * _P11 + 0.0) != 0
                    oom |= buf_push(&qs, k1z * _P12 + k3z * _P32 + k4z * _P42 + k5z * _P52 + k6z * _P62 + k7z * _P72) != 0
                    oom |= buf_push(&qs, k1z * _P13 + k3z * _P33 + k4z * _P43 + k5z * _P53 + k6z * _P63 + k7z * _P73) != 0
                    oom |= buf_push(&qs, k1z * _P14 + k3z * _P34 + k4z * _P44 + k5z * _P54 + k6z * _P64 + k7z * _P74) != 0
                    oom |= buf_push(&hs, h) != 0
                    t = t + h
                    oom |= buf_push(&ts, t) != 0
                    x = x1
                    y = y1
                    z = z1
                    oom |= buf_push(&xs, x) != 0
                    oom |= buf_push(&ys_, y) != 0
                    oom |= buf_push(&zs, z) != 0
                    k1x = k7x
                    k1y = k7y
                    k1z = k7z
                    n_steps += 1
                    if oom:
                        status = _ST_MAX_STEPS
                        break

                    if x * x + y * y + z * z > esc2:
                        status = _ST_ESCAPE
                        break
                    if k7x * k7x + k7y * k7y + k7z * k7z < fp2:
                        status = _ST_FIXED_POINT
                        break
                    if last_step:
                        status = _ST_TIME
                        break

                    if h_fixed <= 0.0:
                        if err == 0.0:
                            fac = _FAC_MAX_INV
                        else:
                            fac11 = pow(err, _EXPO)
                            fac = fac11 / pow(facold, _BETA)
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
                    fac11 = pow(err, _EXPO)
                    fac = fac11 / _SAFETY
                    if fac > _FAC_MIN_INV:
                        fac = _FAC_MIN_INV
                    h = h / fac
                    last_rejected = True

    if oom:
        free(ts.data); free(xs.data); free(ys_.data)
        free(zs.data); free(qs.data); free(hs.data)
        raise MemoryError()

    cdef size_t n = hs.n
    t_arr = np.empty(n + 1)
    y_arr = np.empty((n + 1, 3))
    q_arr = np.empty((n, 3, 4))
    h_arr = np.empty(n)
    cdef double[:] tv = t_arr
    cdef double[:, :] yv = y_arr
    cdef double[:] hv = h_arr
    cdef size_t i
    for i in range(n + 1):
        tv[i] = ts.data[i]
        yv[i, 0] = xs.data[i]
        yv[i, 1] = ys_.data[i]
        yv[i, 2] = zs.data[i]
    cdef double[:, :, :] qv = q_arr
    cdef size_t j, l
    for i in range(n):
        for j in range(3):
            for l in range(4):
                qv[i, j, l] = qs.data[12 * i + 4 * j + l]
    for i in range(n):
        hv[i] = hs.data[i]

    free(ts.data); free(xs.data); free(ys_.data)
    free(zs.data); free(qs.data); free(hs.data)
    return status, (t_arr, y_arr, q_arr, h_arr)
