"""Independent brute-force reference implementations used by the tests.

Everything here is written with explicit Python loops over pixels and does
not import from ``fusegrad``, so it cannot share a bug with the code under
test.
"""
import math

import numpy as np

KX = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
KY = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]]


def sample(img, r, c, pad):
    h, w = len(img), len(img[0])
    if pad == "zero":
        if 0 <= r < h and 0 <= c < w:
            return img[r][c]
        return 0.0
    # reflect without repeating the edge sample
    if r < 0:
        r = -r
    if r >= h:
        r = 2 * (h - 1) - r
    if c < 0:
        c = -c
    if c >= w:
        c = 2 * (w - 1) - c
    return img[r][c]


def sobel_loop(img, pad="zero"):
    img = np.asarray(img).tolist()
    h, w = len(img), len(img[0])
    gx = [[0.0] * w for _ in range(h)]
    gy = [[0.0] * w for _ in range(h)]
    for r in range(h):
        for c in range(w):
            sx = sy = 0.0
            for a in range(3):
                for b in range(3):
                    v = sample(img, r + a - 1, c + b - 1, pad)
                    sx += KX[a][b] * v
                    sy += KY[a][b] * v
            gx[r][c] = sx
            gy[r][c] = sy
    return np.array(gx), np.array(gy)


def resize_loop(img, scale):
    img = np.asarray(img)
    h, w = img.shape
    oh, ow = int(math.floor(scale * h + 0.5)), int(math.floor(scale * w + 0.5))
    out = np.zeros((oh, ow))

    def coord(i, n):
        s = (i + 0.5) / scale - 0.5
        s = min(max(s, 0.0), n - 1)
        i0 = int(math.floor(s))
        i1 = min(i0 + 1, n - 1)
        return i0, i1, s - i0

    for i in range(oh):
        y0, y1, fy = coord(i, h)
        for j in range(ow):
            x0, x1, fx = coord(j, w)
            top = (1 - fx) * img[y0, x0] + fx * img[y0, x1]
            bot = (1 - fx) * img[y1, x0] + fx * img[y1, x1]
            out[i, j] = (1 - fy) * top + fy * bot
    return out


def intensity_loop(f, v, i):
    h, w = f.shape
    total = 0.0
    for r in range(h):
        for c in range(w):
            total += abs(f[r, c] - max(v[r, c], i[r, c]))
    return total / (h * w)


def baseline_loop(f, v, i, pad="zero"):
    fx, fy = sobel_loop(f, pad)
    vx, vy = sobel_loop(v, pad)
    ix, iy = sobel_loop(i, pad)
    h, w = f.shape
    total = 0.0
    for r in range(h):
        for c in range(w):
            gf = abs(fx[r, c]) + abs(fy[r, c])
            gmax = max(abs(vx[r, c]) + abs(vy[r, c]), abs(ix[r, c]) + abs(iy[r, c]))
            total += abs(gf - gmax)
    return total / (h * w)


def tcmoa_loop(f, v, i, pad="zero"):
    fx, fy = sobel_loop(f, pad)
    vx, vy = sobel_loop(v, pad)
    ix, iy = sobel_loop(i, pad)
    h, w = f.shape
    total = 0.0
    for r in range(h):
        for c in range(w):
            gv = vx[r, c] + vy[r, c]
            gi = ix[r, c] + iy[r, c]
            target = gv if abs(gv) >= abs(gi) else gi
            total += abs(fx[r, c] + fy[r, c] - target)
    return total / (h * w)


def ours_loop(f, v, i, scales, weights, pad="zero"):
    total = 0.0
    for s, wt in zip(scales, weights):
        fs, vs, is_ = (p if s == 1 else resize_loop(p, s) for p in (f, v, i))
        fx, fy = sobel_loop(fs, pad)
        vx, vy = sobel_loop(vs, pad)
        ix, iy = sobel_loop(is_, pad)
        h, w = fs.shape
        ex = ey = 0.0
        for r in range(h):
            for c in range(w):
                sx = vx[r, c] if abs(vx[r, c]) >= abs(ix[r, c]) else ix[r, c]
                sy = vy[r, c] if abs(vy[r, c]) >= abs(iy[r, c]) else iy[r, c]
                ex += abs(fx[r, c] - sx)
                ey += abs(fy[r, c] - sy)
        total += wt * (ex / (h * w) + ey / (h * w))
    return total


def gaussian_2d(size=11, sigma=1.5):
    g = [[math.exp(-((a - size // 2) ** 2 + (b - size // 2) ** 2) / (2 * sigma * sigma))
          for b in range(size)] for a in range(size)]
    s = sum(map(sum, g))
    return [[x / s for x in row] for row in g]


def ssim_loop(x, y, size=11, sigma=1.5, c1=0.01 ** 2, c2=0.03 ** 2):
    """Mean SSIM over all valid window placements."""
    win = gaussian_2d(size, sigma)
    h, w = x.shape
    vals = []
    for r in range(h - size + 1):
        for c in range(w - size + 1):
            mx = my = exx = eyy = exy = 0.0
            for a in range(size):
                for b in range(size):
                    wt = win[a][b]
                    p, q = x[r + a, c + b], y[r + a, c + b]
                    mx += wt * p
                    my += wt * q
                    exx += wt * p * p
                    eyy += wt * q * q
                    exy += wt * p * q
            vx, vy, cxy = exx - mx * mx, eyy - my * my, exy - mx * my
            vals.append((2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2)))
    return sum(vals) / len(vals)


def ssim_loss_loop(f, v, i):
    return 1.0 - 0.5 * (ssim_loop(f, v) + ssim_loop(f, i))


# ---------------------------------------------------------------- metrics

def levels(img):
    return [[min(255, max(0, int(math.floor(x * 255 + 0.5)))) for x in row] for row in np.asarray(img)]


def entropy_loop(img):
    q = levels(img)
    counts = {}
    n = 0
    for row in q:
        for v in row:
            counts[v] = counts.get(v, 0) + 1
            n += 1
    return -sum((k / n) * math.log2(k / n) for k in counts.values())


def mi_pair_loop(a, b):
    qa, qb = levels(a), levels(b)
    n = 0
    joint, ca, cb = {}, {}, {}
    for ra, rb in zip(qa, qb):
        for x, y in zip(ra, rb):
            joint[(x, y)] = joint.get((x, y), 0) + 1
            ca[x] = ca.get(x, 0) + 1
            cb[y] = cb.get(y, 0) + 1
            n += 1
    total = 0.0
    for (x, y), k in joint.items():
        pxy = k / n
        total += pxy * math.log2(pxy / ((ca[x] / n) * (cb[y] / n)))
    return total


def mi_loop(f, i, v):
    return mi_pair_loop(f, i) + mi_pair_loop(f, v)


def sd_loop(img):
    vals = [255.0 * x for row in np.asarray(img) for x in row]
    m = sum(vals) / len(vals)
    return math.sqrt(sum((x - m) ** 2 for x in vals) / len(vals))


def corr_loop(a, b):
    xs = [x for row in a for x in row]
    ys = [y for row in b for y in row]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        return 0.0
    return sxy / math.sqrt(sxx * syy)


def scd_loop(f, i, v):
    return corr_loop(f - i, v) + corr_loop(f - v, i)


def qabf_loop(f, i, v):
    """Per-pixel Xydeas-Petrovic measure with zero-padded Sobel."""
    tg, kg, dg = 0.9994, -15.0, 0.5
    ta, ka, da = 0.9879, -22.0, 0.8

    def edge(img):
        gx, gy = sobel_loop(img, "zero")
        h, w = gx.shape
        g = np.zeros((h, w))
        a = np.zeros((h, w))
        for r in range(h):
            for c in range(w):
                g[r, c] = math.sqrt(gx[r, c] ** 2 + gy[r, c] ** 2)
                a[r, c] = math.pi / 2 if gx[r, c] == 0 else math.atan(gy[r, c] / gx[r, c])
        return g, a

    gf, af = edge(f)
    ga, aa = edge(i)
    gb, ab = edge(v)
    h, w = f.shape
    num = den = 0.0
    for r in range(h):
        for c in range(w):
            for gs, as_ in ((ga, aa), (gb, ab)):
                s, fv = gs[r, c], gf[r, c]
                if s > fv:
                    rel = fv / s
                elif fv > s:
                    rel = s / fv
                else:
                    rel = 1.0 if s > 0 else 0.0
                ra = 1 - abs(as_[r, c] - af[r, c]) / (math.pi / 2)
                q = tg / (1 + math.exp(kg * (rel - dg))) * ta / (1 + math.exp(ka * (ra - da)))
                num += q * s
                den += s
    return num / den if den > 0 else 0.0


def vif_reference(ref, dist):
    """Pixel-domain VIF in the style of the common MATLAB port, via scipy."""
    from scipy.signal import convolve2d as _conv

    def convolve2d(a, k, mode):
        # MATLAB's filter2(..., 'valid') yields an empty result when the
        # window is larger than the image; scipy would swap the operands
        if min(a.shape) < k.shape[0]:
            return np.zeros((max(0, a.shape[0] - k.shape[0] + 1), max(0, a.shape[1] - k.shape[1] + 1)))
        return _conv(a, k, mode=mode)

    sigma_nsq = 2.0
    eps = 1e-10
    num = den = 0.0
    for scale in range(1, 5):
        n = 2 ** (4 - scale + 1) + 1
        sd = n / 5.0
        m = (n - 1) / 2.0
        yy, xx = np.ogrid[-m:m + 1, -m:m + 1]
        win = np.exp(-(xx * xx + yy * yy) / (2.0 * sd * sd))
        win = win / win.sum()
        k = np.rot90(win, 2)
        if scale > 1:
            ref = convolve2d(ref, k, mode="valid")[::2, ::2]
            dist = convolve2d(dist, k, mode="valid")[::2, ::2]
        mu1 = convolve2d(ref, k, mode="valid")
        mu2 = convolve2d(dist, k, mode="valid")
        s1 = convolve2d(ref * ref, k, mode="valid") - mu1 * mu1
        s2 = convolve2d(dist * dist, k, mode="valid") - mu2 * mu2
        s12 = convolve2d(ref * dist, k, mode="valid") - mu1 * mu2
        s1[s1 < 0] = 0
        s2[s2 < 0] = 0
        g = s12 / (s1 + eps)
        sv = s2 - g * s12
        g[s1 < eps] = 0
        sv[s1 < eps] = s2[s1 < eps]
        s1[s1 < eps] = 0
        g[s2 < eps] = 0
        sv[s2 < eps] = 0
        sv[g < 0] = s2[g < 0]
        g[g < 0] = 0
        sv[sv <= eps] = eps
        num += np.sum(np.log10(1 + g * g * s1 / (sv + sigma_nsq)))
        den += np.sum(np.log10(1 + s1 / sigma_nsq))
    return num / den


def vif_triple_reference(f, i, v):
    return 0.5 * (vif_reference(255.0 * i, 255.0 * f) + vif_reference(255.0 * v, 255.0 * f))
