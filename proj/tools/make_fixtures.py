#!/usr/bin/env python3
"""Regenerates data/*.json from the feeder tables below.

Per-bus loads are the standard test-feeder spot loads (summed over phases),
scaled per period so the feeder total follows the shortage series.  Line
impedances are single-phase-equivalent approximations per conductor
configuration.  Usage: python3 tools/make_fixtures.py [outdir]
"""
import json
import math
import os
import sys

OUT = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "data")
N_PERIODS, DT = 8, 4.0
SHORT_CS1 = [2.21, 2.46, 2.33, 2.09, 2.09, 2.21, 2.46, 2.33]
SHORT_CS2 = [3.14, 3.49, 3.32, 2.97, 2.97, 3.14, 3.49, 3.32]
CRIT = 0.6
FT_PER_MILE = 5280.0


def half_sine(n=N_PERIODS, dt=DT, start=8.0, rise=6.0, sset=18.0):
    out = []
    for k in range(n):
        a, b = start + k * dt, start + (k + 1) * dt
        total = 0.0
        for day in range(int(a // 24) - 1, int(b // 24) + 2):
            lo, hi = max(a, day * 24 + rise), min(b, day * 24 + sset)
            if hi > lo:
                w = math.pi / (sset - rise)
                total += (math.cos(w * (lo - day * 24 - rise)) - math.cos(w * (hi - day * 24 - rise))) / w
        out.append(round(total / dt, 6))
    return out


PV = half_sine()


def line(a, b, feet, cfg, table, zbase, smax):
    r, x = table[cfg]
    mi = feet / FT_PER_MILE
    return {"id": f"{a}-{b}", "from": str(a), "to": str(b),
            "r": round(r * mi / zbase, 8), "x": round(x * mi / zbase, 8),
            "i2max": round(smax[cfg] ** 2, 6), "smax": smax[cfg]}


def special(a, b, r, x, s):
    return {"id": f"{a}-{b}", "from": str(a), "to": str(b), "r": r, "x": x, "i2max": round(s * s, 6), "smax": s}


def loads_for(spot, shape_total, q_ratio=None):
    pbase = sum(p for p, _ in spot.values())
    qbase = sum(q for _, q in spot.values())
    out = []
    for bus, (p, q) in spot.items():
        pt = [round(p / pbase * s, 6) for s in shape_total]
        if q_ratio is None:
            qt = [round(q / pbase * s, 6) for s in shape_total]
        else:
            qt = [round(q / qbase * q_ratio * s, 6) for s in shape_total]
        out.append({"bus": str(bus), "p_total": pt, "p_crit": [round(CRIT * v, 6) for v in pt],
                    "q_total": qt, "q_crit": [round(CRIT * v, 6) for v in qt]})
    return out


def feeder(name, v_kv, buses, lines, loads, ders):
    ids = {str(b) for b in buses}
    assert len(ids) == len(buses), name
    assert len(lines) == len(buses) - 1, (name, len(lines), len(buses))
    parent = {b: b for b in ids}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for l in lines:
        ra, rb = find(l["from"]), find(l["to"])
        assert ra != rb, ("cycle", name, l["id"])
        parent[ra] = rb
    for l in loads:
        assert l["bus"] in ids, l["bus"]
    return {"name": name, "bases": {"s_mva": 1.0, "v_kv": v_kv},
            "horizon": {"n_periods": N_PERIODS, "dt_hours": DT},
            "buses": [{"id": str(b), "vmin": 0.95, "vmax": 1.05} for b in buses],
            "lines": lines, "loads": loads, "ders": ders}


# ------------------------------------------------------------------ 13 ----
Z13 = {601: (0.186, 0.597), 602: (0.592, 0.748), 603: (1.329, 1.347), 604: (1.329, 1.347),
       605: (1.329, 1.347), 606: (0.497, 0.258), 607: (1.343, 0.512)}
S13 = {601: 5.26, 602: 3.82, 603: 1.66, 604: 1.66, 605: 1.66, 606: 2.37, 607: 1.19}
ZB13 = 4.16 ** 2 / 1.0


def ieee13():
    buses = [650, 632, 633, 634, 645, 646, 671, 680, 684, 611, 652, 692, 675]
    L = lambda a, b, ft, c: line(a, b, ft, c, Z13, ZB13, S13)
    lines = [L(650, 632, 2000, 601), L(632, 633, 500, 602), special(633, 634, 0.022, 0.04, 0.5),
             L(632, 645, 500, 603), L(645, 646, 300, 603), L(632, 671, 2000, 601),
             L(671, 684, 300, 604), L(671, 680, 1000, 601), special(671, 692, 1e-4, 1e-4, 5.26),
             L(684, 611, 300, 605), L(684, 652, 800, 607), L(692, 675, 500, 606)]
    spot = {634: (400, 290), 645: (170, 125), 646: (230, 132), 652: (128, 86), 671: (1355, 776),
            675: (843, 462), 692: (170, 151), 611: (170, 80)}
    shape = [round(3.466 * s / max(SHORT_CS1), 6) for s in SHORT_CS1]
    ders = [{"bus": "680", "kind": "DG", "p_cap": 0.4},
            {"bus": "675", "kind": "PV", "p_cap": 0.5, "profile": PV},
            {"bus": "646", "kind": "ESS", "e_cap": 0.5, "s_cap": 0.25, "e_surplus": 0.5, "r_e": 0.05, "r_ct": 0.02}]
    return feeder("ieee13", 4.16, buses, lines, loads_for(spot, shape), ders)


# ------------------------------------------------------------------ 37 ----
Z37 = {721: (0.2926, 0.1973), 722: (0.4751, 0.2973), 723: (1.2936, 0.6713), 724: (2.0952, 0.7758)}
S37 = {721: 5.8, 722: 4.0, 723: 1.91, 724: 1.3}
ZB37 = 4.8 ** 2 / 1.0

SEG37 = [(701, 702, 960, 722), (702, 705, 400, 724), (702, 713, 360, 723), (702, 703, 1320, 722),
         (703, 727, 240, 724), (703, 730, 600, 723), (704, 714, 80, 724), (704, 720, 800, 723),
         (705, 742, 320, 724), (705, 712, 240, 724), (706, 725, 280, 724), (707, 724, 760, 724),
         (707, 722, 120, 724), (708, 733, 320, 723), (708, 732, 320, 724), (709, 731, 600, 723),
         (709, 708, 320, 723), (710, 735, 200, 724), (710, 736, 1280, 724), (711, 741, 400, 723),
         (711, 740, 200, 724), (713, 704, 520, 723), (714, 718, 520, 724), (720, 707, 920, 724),
         (720, 706, 600, 723), (727, 744, 280, 723), (730, 709, 200, 723), (733, 734, 560, 723),
         (734, 737, 640, 723), (734, 710, 520, 724), (737, 738, 400, 723), (738, 711, 400, 723),
         (744, 728, 200, 724), (744, 729, 280, 724), (799, 701, 1850, 721)]
LOAD37 = {701: (630, 315), 712: (85, 40), 713: (85, 40), 714: (38, 18), 718: (85, 40), 720: (85, 40),
          722: (161, 80), 724: (42, 21), 725: (42, 21), 727: (42, 21), 728: (126, 63), 729: (42, 21),
          730: (85, 40), 731: (85, 40), 732: (42, 21), 733: (85, 40), 734: (42, 21), 735: (85, 40),
          736: (42, 21), 737: (140, 70), 738: (126, 62), 740: (85, 40), 741: (42, 21), 742: (93, 44),
          744: (42, 21)}


def ieee37():
    buses = sorted({a for s in SEG37 for a in s[:2]} | {775})
    lines = [line(a, b, ft, c, Z37, ZB37, S37) for a, b, ft, c in SEG37]
    lines.append(special(709, 775, 0.0018, 0.0362, 0.5))
    assert sum(p for p, _ in LOAD37.values()) == 2457 and sum(q for _, q in LOAD37.values()) == 1201
    ders = [{"bus": "709", "kind": "DG", "p_cap": 0.2},
            {"bus": "720", "kind": "ESS", "e_cap": 0.2, "s_cap": 0.05, "e_surplus": 0.2, "r_e": 0.05, "r_ct": 0.02},
            {"bus": "701", "kind": "PV", "p_cap": 0.5, "profile": PV}]
    return feeder("ieee37", 4.8, buses, lines, loads_for(LOAD37, SHORT_CS1, 1201 / 2457), ders)


# ----------------------------------------------------------------- 123 ----
Z123 = {c: (0.306, 0.627) for c in range(1, 7)}
Z123.update({7: (0.4576, 1.078), 8: (0.4576, 1.078), 9: (1.3292, 1.3475), 10: (1.3292, 1.3475),
             11: (1.3292, 1.3475), 12: (1.5209, 0.7521)})
S123 = {c: 3.82 for c in range(1, 9)}
S123.update({9: 0.55, 10: 0.55, 11: 0.55, 12: 1.4})
ZB123 = 4.16 ** 2 / 1.0

SEG123 = [(1, 2, 175, 10), (1, 3, 250, 11), (1, 7, 300, 1), (3, 4, 200, 11), (3, 5, 325, 11), (5, 6, 250, 11),
          (7, 8, 200, 1), (8, 12, 225, 10), (8, 9, 225, 9), (8, 13, 300, 1), (9, 14, 425, 9), (13, 34, 150, 11),
          (13, 18, 825, 2), (14, 11, 250, 9), (14, 10, 250, 9), (15, 16, 375, 11), (15, 17, 350, 11),
          (18, 19, 250, 9), (18, 21, 300, 2), (19, 20, 325, 9), (21, 22, 525, 10), (21, 23, 250, 2),
          (23, 24, 550, 11), (23, 25, 275, 2), (25, 26, 350, 7), (25, 28, 200, 2), (26, 27, 275, 7),
          (26, 31, 225, 11), (27, 33, 500, 9), (28, 29, 300, 2), (29, 30, 350, 2), (30, 250, 200, 2),
          (31, 32, 300, 11), (34, 15, 100, 11), (35, 36, 650, 8), (35, 40, 250, 1), (36, 37, 300, 9),
          (36, 38, 250, 10), (38, 39, 325, 10), (40, 41, 325, 11), (40, 42, 250, 1), (42, 43, 500, 10),
          (42, 44, 200, 1), (44, 45, 200, 9), (44, 47, 250, 1), (45, 46, 300, 9), (47, 48, 150, 4),
          (47, 49, 250, 4), (49, 50, 250, 4), (50, 51, 250, 4), (52, 53, 200, 1), (53, 54, 125, 1),
          (54, 55, 275, 1), (54, 57, 350, 3), (55, 56, 275, 1), (57, 58, 250, 10), (57, 60, 750, 3),
          (58, 59, 250, 10), (60, 61, 550, 5), (60, 62, 250, 12), (62, 63, 175, 12), (63, 64, 350, 12),
          (64, 65, 425, 12), (65, 66, 325, 12), (67, 68, 200, 9), (67, 72, 275, 3), (67, 97, 250, 3),
          (68, 69, 275, 9), (69, 70, 325, 9), (70, 71, 275, 9), (72, 73, 275, 11), (72, 76, 200, 3),
          (73, 74, 350, 11), (74, 75, 400, 11), (76, 77, 400, 6), (76, 86, 700, 3), (77, 78, 100, 6),
          (78, 79, 225, 6), (78, 80, 475, 6), (80, 81, 475, 6), (81, 82, 250, 6), (81, 84, 675, 11),
          (82, 83, 250, 6), (84, 85, 475, 11), (86, 87, 450, 6), (87, 88, 175, 9), (87, 89, 275, 6),
          (89, 90, 225, 10), (89, 91, 225, 6), (91, 92, 300, 11), (91, 93, 225, 6), (93, 94, 275, 9),
          (93, 95, 300, 6), (95, 96, 200, 10), (97, 98, 275, 3), (98, 99, 550, 3), (99, 100, 300, 3),
          (100, 450, 800, 3), (101, 102, 225, 11), (101, 105, 275, 3), (102, 103, 325, 11),
          (103, 104, 700, 11), (105, 106, 225, 10), (105, 108, 325, 3), (106, 107, 575, 10),
          (108, 109, 450, 9), (108, 300, 1000, 3), (109, 110, 300, 9), (110, 111, 575, 9),
          (110, 112, 125, 9), (112, 113, 525, 9), (113, 114, 325, 9), (149, 1, 400, 1)]
SWITCH123 = [(13, 152), (18, 135), (60, 160), (97, 197), (135, 35), (152, 52), (160, 67), (197, 101)]
_L20, _L40 = (20, 10), (40, 20)
LOAD123 = {1: _L40, 2: _L20, 4: _L40, 5: _L20, 6: _L40, 7: _L20, 9: _L40, 10: _L20, 11: _L40, 12: _L20,
           16: _L40, 17: _L20, 19: _L40, 20: _L40, 22: _L40, 24: _L40, 28: _L40, 29: _L40, 30: _L40,
           31: _L20, 32: _L20, 33: _L40, 34: _L40, 35: _L40, 37: _L40, 38: _L20, 39: _L20, 41: _L20,
           42: _L20, 43: _L40, 45: _L20, 46: _L20, 47: (105, 75), 48: (210, 150), 49: (140, 95), 50: _L40,
           51: _L20, 52: _L40, 53: _L40, 55: _L20, 56: _L20, 58: _L20, 59: _L20, 60: _L20, 62: _L40,
           63: _L40, 64: (75, 35), 65: (140, 100), 66: (75, 35), 68: _L20, 69: _L40, 70: _L20, 71: _L40,
           73: _L40, 74: _L40, 75: _L40, 76: (245, 180), 77: _L40, 79: _L40, 80: _L40, 82: _L40, 83: _L20,
           84: _L20, 85: _L40, 86: _L20, 87: _L40, 88: _L40, 90: _L40, 92: _L40, 94: _L40, 95: _L20,
           96: _L20, 98: _L40, 99: _L40, 100: _L40, 102: _L20, 103: _L40, 104: _L40, 106: _L40, 107: _L40,
           109: _L40, 111: _L20, 112: _L20, 113: _L40, 114: _L20}


def ieee123():
    lines = [line(a, b, ft, c, Z123, ZB123, S123) for a, b, ft, c in SEG123]
    lines += [special(a, b, 1e-4, 1e-4, 3.82) for a, b in SWITCH123]
    lines.append(special(61, 610, 0.0847, 0.181, 0.15))
    buses = sorted({int(l["from"]) for l in lines} | {int(l["to"]) for l in lines})
    ders = [{"bus": "94", "kind": "DG", "p_cap": 0.1},
            {"bus": "52", "kind": "DG", "p_cap": 0.2},
            {"bus": "25", "kind": "ESS", "e_cap": 0.3, "s_cap": 0.075, "e_surplus": 0.3, "r_e": 0.05, "r_ct": 0.02},
            {"bus": "18", "kind": "PV", "p_cap": 2.0, "profile": PV},
            {"bus": "35", "kind": "PV", "p_cap": 2.0, "profile": PV}]
    return feeder("ieee123", 4.16, buses, lines, loads_for(LOAD123, SHORT_CS2, 1920 / 3490), ders)


# ----------------------------------------------------------- scenarios ----
def scenario(name, damaged, hours, crews, seed, max_periods=2):
    return {"name": name, "damaged": damaged, "repair_time_hours": dict(zip(damaged, hours)),
            "travel": {"seed": seed, "max_periods": max_periods}, "n_crews": crews}


def forecast(name, short, q_ratio, ders, **extra):
    f = {"name": name, "horizon": {"n_periods": N_PERIODS, "dt_hours": DT}, "s_mva": 1.0,
         "p_total": short, "q_ratio": q_ratio, "ders": ders}
    f.update(extra)
    return f


CATALOG = {"items": [
    {"kind": "MDG", "size_index": 1, "p_size": 1.0, "cost": 1000},
    {"kind": "MDG", "size_index": 2, "p_size": 1.5, "cost": 1500},
    {"kind": "MESS", "size_index": 1, "e_size": 1.5, "s_size": 0.5, "cost": 1000},
    {"kind": "MESS", "size_index": 2, "e_size": 2.5, "s_size": 1.0, "cost": 1500},
    {"kind": "MPV", "size_index": 1, "p_size": 0.3, "cost": 1000},
    {"kind": "MPV", "size_index": 2, "p_size": 0.4, "cost": 1500}]}


def main():
    os.makedirs(OUT, exist_ok=True)
    files = {
        "ieee13.json": ieee13(),
        "ieee37.json": ieee37(),
        "ieee123.json": ieee123(),
        "ieee13_scenario.json": scenario("ieee13-storm", ["632-645", "632-671", "671-692"], [4, 8, 4], 1, 5),
        "cs1_scenario.json": scenario("cs1", ["702-713", "704-720", "702-703", "703-730", "709-708", "734-737"],
                                      [3, 4, 6, 3, 5, 6], 2, 11),
        "cs2_scenario.json": scenario("cs2", ["8-13", "13-18", "18-135", "23-25", "13-152", "60-160", "76-86",
                                              "67-97"], [4, 3, 5, 4, 7, 2, 5, 7], 2, 3),
        "catalog.json": CATALOG,
        "cs1_forecast.json": forecast("cs1", SHORT_CS1, 1201 / 2457, [
            {"kind": "DG", "p_cap": 0.2},
            {"kind": "ESS", "e_cap": 0.2, "s_cap": 0.05, "e_surplus": 0.2, "r_e": 0.05, "r_ct": 0.02},
            {"kind": "PV", "p_cap": 0.5}]),
        # critical fraction, reactive critical fraction and (k1, k2) calibrated
        # for this case; see README "Pre-disaster parameterization".
        "cs2_forecast.json": forecast("cs2", SHORT_CS2, 1920 / 3490, [
            {"kind": "DG", "p_cap": 0.1}, {"kind": "DG", "p_cap": 0.2},
            {"kind": "ESS", "e_cap": 0.3, "s_cap": 0.075, "e_surplus": 0.3, "r_e": 0.05, "r_ct": 0.02},
            {"kind": "PV", "p_cap": 2.0}, {"kind": "PV", "p_cap": 2.0}],
            critical_fraction=0.5, q_critical_fraction=0.8, k1=0.2, k2=0.4),
        # two generators so that the repair order changes the dispatch
        "ieee13_mix.json": {"items": [dict(CATALOG["items"][0], count=1), dict(CATALOG["items"][1], count=1)]},
    }
    for name, obj in files.items():
        with open(os.path.join(OUT, name), "w") as fh:
            json.dump(obj, fh, indent=1)
            fh.write("\n")
    print("wrote", len(files), "files to", os.path.abspath(OUT))


if __name__ == "__main__":
    main()
