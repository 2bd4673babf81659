#!/usr/bin/env python3
"""Regenerates data/mp478.json: face-mesh index groups, drawing chains and a
procedural neutral layout in normalized image coordinates (x right, y down)."""
import json
import math
import sys

POINT_COUNT = 478

CONTOUR = [10, 338, 297, 332, 284, 251, 389, 356, 454, 323, 361, 288, 397, 365,
           379, 378, 400, 377, 152, 148, 176, 149, 150, 136, 172, 58, 132, 93,
           234, 127, 162, 21, 54, 103, 67, 109]

# lids run outer corner -> inner corner
EYE_R_LOWER = [33, 7, 163, 144, 145, 153, 154, 155, 133]
EYE_R_UPPER = [33, 246, 161, 160, 159, 158, 157, 173, 133]
EYE_L_LOWER = [263, 249, 390, 373, 374, 380, 381, 382, 362]
EYE_L_UPPER = [263, 466, 388, 387, 386, 385, 384, 398, 362]

# brows run outer -> inner
BROW_R_LOWER = [46, 53, 52, 65, 55]
BROW_R_UPPER = [70, 63, 105, 66, 107]
BROW_L_LOWER = [276, 283, 282, 295, 285]
BROW_L_UPPER = [300, 293, 334, 296, 336]

NOSE_BRIDGE = [168, 6, 197, 195, 5, 4, 1, 19, 94, 2]
NOSE_BASE = [98, 97, 2, 326, 327]
NOSE_ALA_L = [327, 294, 278, 344, 440, 275, 4]
NOSE_ALA_R = [4, 45, 220, 115, 48, 64, 98]

# lips run right corner -> left corner (image left -> image right)
LIPS_OUTER_LOWER = [61, 146, 91, 181, 84, 17, 314, 405, 321, 375, 291]
LIPS_OUTER_UPPER = [61, 185, 40, 39, 37, 0, 267, 269, 270, 409, 291]
LIPS_INNER_LOWER = [78, 95, 88, 178, 87, 14, 317, 402, 318, 324, 308]
LIPS_INNER_UPPER = [78, 191, 80, 81, 82, 13, 312, 311, 310, 415, 308]

IRIS_R = [468, 469, 470, 471, 472]
IRIS_L = [473, 474, 475, 476, 477]


def uniq(*lists):
    out = []
    for lst in lists:
        for i in lst:
            if i not in out:
                out.append(i)
    return out


def depth(x, y):
    r2 = ((x - 0.5) / 0.32) ** 2 + ((y - 0.52) / 0.42) ** 2
    return round(-0.06 * max(0.0, 1.0 - r2), 6)


def main(path):
    pts = [None] * POINT_COUNT

    def put(i, x, y, z=None):
        pts[i] = [round(x, 6), round(y, 6), depth(x, y) if z is None else round(z, 6)]

    cx, cy, rx, ry = 0.5, 0.52, 0.30, 0.40
    for k, i in enumerate(CONTOUR):
        a = -math.pi / 2 + 2 * math.pi * k / len(CONTOUR)
        put(i, cx + rx * math.cos(a), cy + ry * math.sin(a))

    def lid(chain, outer_x, inner_x, ey, half_h, sign):
        n = len(chain) - 1
        for k, i in enumerate(chain):
            t = k / n
            put(i, outer_x + (inner_x - outer_x) * t, ey + sign * half_h * math.sin(math.pi * t))

    ey, hw, hh = 0.42, 0.05, 0.022
    lid(EYE_R_LOWER, 0.38 - hw, 0.38 + hw, ey, hh, +1)
    lid(EYE_R_UPPER, 0.38 - hw, 0.38 + hw, ey, hh, -1)
    lid(EYE_L_LOWER, 0.62 + hw, 0.62 - hw, ey, hh, +1)
    lid(EYE_L_UPPER, 0.62 + hw, 0.62 - hw, ey, hh, -1)

    def iris(ids, ex):
        r = 0.012
        put(ids[0], ex, ey)
        for k, i in enumerate(ids[1:]):
            a = k * math.pi / 2
            put(i, ex + r * math.cos(a), ey - r * math.sin(a))

    iris(IRIS_R, 0.38)
    iris(IRIS_L, 0.62)

    def brow(chain, outer_x, inner_x, by, arch):
        n = len(chain) - 1
        for k, i in enumerate(chain):
            t = k / n
            put(i, outer_x + (inner_x - outer_x) * t, by - arch * math.sin(math.pi * (0.3 + 0.7 * t)))

    brow(BROW_R_LOWER, 0.31, 0.46, 0.355, 0.015)
    brow(BROW_R_UPPER, 0.31, 0.46, 0.340, 0.018)
    brow(BROW_L_LOWER, 0.69, 0.54, 0.355, 0.015)
    brow(BROW_L_UPPER, 0.69, 0.54, 0.340, 0.018)

    for k, i in enumerate(NOSE_BRIDGE):
        t = k / (len(NOSE_BRIDGE) - 1)
        y = 0.40 + 0.21 * t
        put(i, 0.5, y, depth(0.5, y) - 0.05 * math.sin(math.pi * min(1.0, t * 1.3)))
    for k, i in enumerate(NOSE_BASE):
        if i == 2:
            continue
        put(i, 0.5 + (k - 2) * 0.022, 0.60)
    for chain, sign in ((NOSE_ALA_L, 1), (NOSE_ALA_R, -1)):
        inner = [i for i in chain if i not in (4, 98, 327)]
        for k, i in enumerate(inner):
            t = (k + 1) / (len(inner) + 1)
            put(i, 0.5 + sign * (0.045 - 0.035 * t), 0.59 - 0.05 * t)

    def lip(chain, half_w, my, amp, sign):
        n = len(chain) - 1
        for k, i in enumerate(chain):
            t = k / n
            put(i, 0.5 - half_w + 2 * half_w * t, my + sign * amp * math.sin(math.pi * t))

    lip(LIPS_OUTER_UPPER, 0.09, 0.70, 0.030, -1)
    lip(LIPS_OUTER_LOWER, 0.09, 0.70, 0.038, +1)
    lip(LIPS_INNER_UPPER, 0.065, 0.70, 0.008, -1)
    lip(LIPS_INNER_LOWER, 0.065, 0.70, 0.008, +1)

    # remaining mesh vertices fill the face on a golden-angle spiral
    rest = [i for i in range(POINT_COUNT) if pts[i] is None]
    golden = math.pi * (3 - math.sqrt(5))
    for k, i in enumerate(rest):
        r = 0.92 * math.sqrt((k + 0.5) / len(rest))
        a = k * golden
        put(i, cx + rx * r * math.cos(a), cy + ry * r * math.sin(a))

    lips = uniq(LIPS_OUTER_LOWER, LIPS_OUTER_UPPER, LIPS_INNER_LOWER, LIPS_INNER_UPPER)
    topo = {
        "id": "mp478",
        "point_count": POINT_COUNT,
        "groups": {
            "contour": CONTOUR,
            "brows": uniq(BROW_R_LOWER, BROW_R_UPPER, BROW_L_LOWER, BROW_L_UPPER),
            "eyes_left": uniq(EYE_L_LOWER, EYE_L_UPPER),
            "eyes_right": uniq(EYE_R_LOWER, EYE_R_UPPER),
            "nose": uniq(NOSE_BRIDGE, NOSE_BASE, NOSE_ALA_L, NOSE_ALA_R),
            "lips": lips,
            "iris_left": IRIS_L,
            "iris_right": IRIS_R,
        },
        "chains": [
            {"group": "contour", "indices": CONTOUR + [CONTOUR[0]], "color": [128, 128, 128]},
            {"group": "brows", "indices": BROW_R_LOWER, "color": [255, 160, 0]},
            {"group": "brows", "indices": BROW_R_UPPER, "color": [255, 160, 0]},
            {"group": "brows", "indices": BROW_L_LOWER, "color": [255, 160, 0]},
            {"group": "brows", "indices": BROW_L_UPPER, "color": [255, 160, 0]},
            {"group": "eyes_right", "indices": EYE_R_LOWER, "color": [0, 200, 255]},
            {"group": "eyes_right", "indices": EYE_R_UPPER, "color": [0, 200, 255]},
            {"group": "eyes_left", "indices": EYE_L_LOWER, "color": [0, 255, 120]},
            {"group": "eyes_left", "indices": EYE_L_UPPER, "color": [0, 255, 120]},
            {"group": "nose", "indices": NOSE_BRIDGE, "color": [255, 255, 0]},
            {"group": "nose", "indices": NOSE_BASE, "color": [255, 255, 0]},
            {"group": "nose", "indices": NOSE_ALA_L, "color": [255, 255, 0]},
            {"group": "nose", "indices": NOSE_ALA_R, "color": [255, 255, 0]},
            {"group": "lips", "indices": LIPS_OUTER_UPPER, "color": [255, 40, 80]},
            {"group": "lips", "indices": LIPS_OUTER_LOWER, "color": [255, 40, 80]},
            {"group": "lips", "indices": LIPS_INNER_UPPER, "color": [255, 0, 255]},
            {"group": "lips", "indices": LIPS_INNER_LOWER, "color": [255, 0, 255]},
        ],
        "socket_corners": {
            "left": [362, 263, 386, 374],
            "right": [133, 33, 159, 145],
        },
        "pupil_color": [255, 255, 255],
        "neutral": pts,
    }
    with open(path, "w") as f:
        json.dump(topo, f, separators=(",", ":"))
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/mp478.json")
