#!/usr/bin/env python3
"""Regenerates the evaluation fixture shipped under tests/fixtures/.

The fixture is a replay-style dataset: 59 images of 64x64 pixels, 232
ship instances split 46 inshore / 186 offshore, plus two stored
prediction files over the same ground truth. Every ship and every
predicted mask is an axis-aligned rectangle, so IoU, Dice, pixel
precision/recall, and dilation-relaxed IoU all reduce to ratios of small
integers. The expected CSVs are computed here with exact rational
arithmetic and rendered with the same `%.3f` rule the library uses.

A guard asserts every rendered value sits at least 1e-4 (in units of the
third decimal) away from a rounding boundary. Floating-point summation in
the library can drift from the exact rational by no more than ~1e-11, so
no digit of any expected file can depend on summation order or platform.

Prediction file A mixes five closed-form mask shapes per matched ship:

  exact    pred == gt                        iou 1    dice 1    prec 1    rec 1
  shift2   gt translated 2 px right          iou 3/5  dice 3/4  prec 3/4  rec 3/4
  half     left half of gt (4x4)             iou 1/2  dice 2/3  prec 1    rec 1/2
  grown    gt widened 2 px both sides        iou 2/3  dice 4/5  prec 2/3  rec 1
  shrunk   gt narrowed 1 px both sides       iou 3/4  dice 6/7  prec 1    rec 3/4

plus a few matched-but-failed records (empty mask, kept out of the mask
statistics but counted as detections) and ground-truth ships with no
prediction at all. Prediction file B answers every instance with the
shift2 mask, giving flat aggregates for the comparison table.
"""

import json
import random
from decimal import Decimal, getcontext
from fractions import Fraction
from pathlib import Path

getcontext().prec = 60

W = H = 64
SHIP_W, SHIP_H = 8, 4
RADII = (0, 1, 2, 3)
CURVE_DIVISIONS = 20

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

# Per-stratum case mix: (case name, count). Matched = everything but "missed".
INSHORE_MIX = [("exact", 20), ("shift2", 20), ("failed", 1), ("missed", 5)]
OFFSHORE_MIX = [
    ("exact", 50),
    ("shift2", 40),
    ("half", 30),
    ("grown", 24),
    ("shrunk", 20),
    ("failed", 2),
    ("missed", 20),
]

METHOD_A = "mask-head"
METHOD_B = "shifted-boxes"
SUPERVISION = "box-prompted"


# ---- exact rectangle pixel arithmetic ---------------------------------------


def clip(rect):
    x0, y0, x1, y1 = rect
    return max(x0, 0), max(y0, 0), min(x1, W), min(y1, H)


def area(rect):
    x0, y0, x1, y1 = rect
    return max(0, x1 - x0) * max(0, y1 - y0)


def inter(a, b):
    return area((max(a[0], b[0]), max(a[1], b[1]), min(a[2], b[2]), min(a[3], b[3])))


def dilate(rect, radius):
    x0, y0, x1, y1 = rect
    return clip((x0 - radius, y0 - radius, x1 + radius, y1 + radius))


def rect_iou(a, b):
    i = inter(a, b)
    u = area(a) + area(b) - i
    return Fraction(i, u)


def pred_rect(case, gt_rect):
    x0, y0, x1, y1 = gt_rect
    if case == "exact":
        return (x0, y0, x1, y1)
    if case == "shift2":
        return (x0 + 2, y0, x1 + 2, y1)
    if case == "half":
        return (x0, y0, x0 + 4, y1)
    if case == "grown":
        return (x0 - 2, y0, x1 + 2, y1)
    if case == "shrunk":
        return (x0 + 1, y0, x1 - 1, y1)
    raise AssertionError(case)


def instance_metrics(case, gt_rect):
    """Exact per-instance statistics as the evaluator computes them."""
    if case in ("failed", "missed"):
        return {
            "iou": Fraction(0),
            "dice": Fraction(0),
            "precision": Fraction(0),
            "recall": Fraction(0),
            "relaxed": {r: Fraction(0) for r in RADII},
        }
    p = pred_rect(case, gt_rect)
    i = inter(p, gt_rect)
    a, b = area(p), area(gt_rect)
    relaxed = {}
    for r in RADII:
        dp, dg = dilate(p, r), dilate(gt_rect, r)
        # The closed-form ratios above assume dilation never clips, so the
        # placement below must keep every dilated rectangle inside the frame.
        assert dp == (p[0] - r, p[1] - r, p[2] + r, p[3] + r), (case, gt_rect, r)
        assert dg == (gt_rect[0] - r, gt_rect[1] - r, gt_rect[2] + r, gt_rect[3] + r)
        relaxed[r] = rect_iou(dp, dg)
    return {
        "iou": Fraction(i, a + b - i),
        "dice": Fraction(2 * i, a + b),
        "precision": Fraction(i, a),
        "recall": Fraction(i, b),
        "relaxed": relaxed,
    }


def rect_rle_counts(rect):
    """Column-major run lengths (leading zero run) for a solid rectangle."""
    x0, y0, x1, y1 = rect
    w, h = x1 - x0, y1 - y0
    counts = [x0 * H + y0]
    for c in range(w):
        counts.append(h)
        if c + 1 < w:
            counts.append(H - h)
    counts.append((W - x1) * H + (H - y1))
    assert all(c > 0 for c in counts) and sum(counts) == W * H, rect
    return counts


# ---- %.3f rendering with a boundary guard -----------------------------------


def fmt3(value):
    if isinstance(value, Decimal):
        value = Fraction(value)
    assert value >= 0
    milli = value * 1000
    floor = milli.numerator // milli.denominator
    rem = milli - floor
    assert abs(rem - Fraction(1, 2)) >= Fraction(1, 10000), (
        f"value {value} is too close to a %.3f rounding boundary"
    )
    k = floor + (1 if rem > Fraction(1, 2) else 0)
    return f"{k // 1000}.{k % 1000:03d}"


def frac_sqrt(value):
    return (Decimal(value.numerator) / Decimal(value.denominator)).sqrt()


# ---- instance park -----------------------------------------------------------


def build_instances():
    rng = random.Random(20260817)
    instances = []
    gid = 0

    def add_stratum(scene, image_ids, per_image, mix):
        nonlocal gid
        cases = [name for name, count in mix for _ in range(count)]
        rng.shuffle(cases)
        assert len(cases) == sum(n for _, n in per_image.items())
        slot = 0
        for iid in image_ids:
            for k in range(per_image[iid]):
                case = cases[slot]
                slot += 1
                gid += 1
                x = 5 + (gid * 3) % 14  # stays in [5, 18]: no dilation clipping
                y = 4 + 10 * k
                instances.append(
                    {
                        "gid": gid,
                        "image_id": iid,
                        "scene": scene,
                        "rect": (x, y, x + SHIP_W, y + SHIP_H),
                        "case": case,
                    }
                )

    inshore_images = {iid: (4 if iid <= 11 else 2) for iid in range(1, 13)}
    offshore_images = {iid: (4 if iid <= 58 else 2) for iid in range(13, 60)}
    add_stratum("inshore", range(1, 13), inshore_images, INSHORE_MIX)
    add_stratum("offshore", range(13, 60), offshore_images, OFFSHORE_MIX)

    assert len(instances) == 232
    assert sum(1 for i in instances if i["scene"] == "inshore") == 46
    assert sum(1 for i in instances if i["scene"] == "offshore") == 186
    assert sum(1 for i in instances if i["case"] != "missed") == 207
    return instances


# ---- aggregation (mirrors the report layer, in exact arithmetic) -------------


def aggregate(stratum):
    n = len(stratum)
    matched = [i for i in stratum if i["case"] != "missed"]
    clean = [i for i in matched if i["case"] != "failed"]
    ious = sorted(i["metrics"]["iou"] for i in clean)
    mean = sum(ious, Fraction(0)) / len(ious)
    var = sum(((v - mean) ** 2 for v in ious), Fraction(0)) / len(ious)
    mid = len(ious) // 2
    median = ious[mid] if len(ious) % 2 else (ious[mid - 1] + ious[mid]) / 2
    mean_of = lambda key: sum((i["metrics"][key] for i in clean), Fraction(0)) / len(clean)
    all_ious = [i["metrics"]["iou"] for i in stratum]
    return {
        "n": n,
        "iou_mean": mean,
        "iou_std": frac_sqrt(var),
        "iou_median": median,
        "dice": mean_of("dice"),
        "precision": mean_of("precision"),
        "recall": mean_of("recall"),
        "iou_at_50": Fraction(sum(1 for v in all_ious if v >= Fraction(1, 2)), n),
        "iou_at_75": Fraction(sum(1 for v in all_ious if v >= Fraction(3, 4)), n),
        "relaxed_iou_r1": sum((i["metrics"]["relaxed"][1] for i in clean), Fraction(0))
        / len(clean),
        "detection_rate": Fraction(len(matched), n),
    }


REPORT_HEADER = (
    "scene,n,iou_mean,iou_std,iou_median,dice,precision,recall,"
    "iou_at_50,iou_at_75,relaxed_iou_r1,detection_rate\n"
)
REPORT_COLUMNS = (
    "iou_mean",
    "iou_std",
    "iou_median",
    "dice",
    "precision",
    "recall",
    "iou_at_50",
    "iou_at_75",
    "relaxed_iou_r1",
    "detection_rate",
)


def strata(instances):
    inshore = [i for i in instances if i["scene"] == "inshore"]
    offshore = [i for i in instances if i["scene"] == "offshore"]
    return [("inshore", inshore), ("offshore", offshore), ("overall", instances)]


def render_report(instances):
    csv = REPORT_HEADER
    for label, stratum in strata(instances):
        agg = aggregate(stratum)
        cells = [label, str(agg["n"])] + [fmt3(agg[c]) for c in REPORT_COLUMNS]
        csv += ",".join(cells) + "\n"
    return csv


def render_curve(stratum):
    csv = "threshold,fraction\n"
    ious = [i["metrics"]["iou"] for i in stratum]
    for j in range(CURVE_DIVISIONS + 1):
        t = Fraction(j, CURVE_DIVISIONS)
        frac = Fraction(sum(1 for v in ious if v >= t), len(ious))
        csv += f"{fmt3(t)},{fmt3(frac)}\n"
    return csv


def render_sweep(stratum):
    csv = "radius,mean_relaxed_iou\n"
    clean = [i for i in stratum if i["case"] not in ("missed", "failed")]
    for r in RADII:
        mean = sum((i["metrics"]["relaxed"][r] for i in clean), Fraction(0)) / len(clean)
        csv += f"{r},{fmt3(mean)}\n"
    return csv


def render_comparison(instances_a, instances_b):
    csv = "scene,method,supervision,iou,dice\n"
    for (label, stratum_a), (_, stratum_b) in zip(strata(instances_a), strata(instances_b)):
        a, b = aggregate(stratum_a), aggregate(stratum_b)
        csv += f"{label},{METHOD_A},{SUPERVISION},{fmt3(a['iou_mean'])},{fmt3(a['dice'])}\n"
        csv += f"{label},{METHOD_B},{SUPERVISION},{fmt3(b['iou_mean'])},{fmt3(b['dice'])}\n"
        csv += f"{label},delta,,{fmt3(a['iou_mean'] - b['iou_mean'])},{fmt3(a['dice'] - b['dice'])}\n"
    return csv


# ---- document emission -------------------------------------------------------


def ground_truth_json(instances):
    image_ids = sorted({i["image_id"] for i in instances})
    images = [
        {"id": iid, "width": W, "height": H, "file_name": f"{iid:06d}.pgm"}
        for iid in image_ids
    ]
    annotations = []
    for inst in instances:
        x0, y0, x1, y1 = inst["rect"]
        annotations.append(
            {
                "id": inst["gid"],
                "image_id": inst["image_id"],
                "bbox": [x0, y0, x1 - x0, y1 - y0],
                "segmentation": [[x0, y0, x1, y0, x1, y1, x0, y1]],
                "category_id": 1,
            }
        )
    return {
        "images": images,
        "annotations": annotations,
        "categories": [{"id": 1, "name": "ship"}],
    }


def scene_tags_json(instances):
    tags = {}
    for inst in instances:
        tags[str(inst["image_id"])] = inst["scene"]
    return {k: tags[k] for k in sorted(tags, key=int)}


def prediction_record(inst, case, score):
    x0, y0, x1, y1 = inst["rect"]
    record = {
        "image_id": inst["image_id"],
        "bbox": [x0, y0, x1 - x0, y1 - y0],
        "score": score,
    }
    if case == "failed":
        record["segmentation_failed"] = True
        record["quality"] = 0.25
    else:
        rect = pred_rect(case, inst["rect"])
        record["segmentation"] = {"size": [H, W], "counts": rect_rle_counts(rect)}
        if case == "shrunk":
            record["quality"] = 0.9
    return record


def predictions_a(instances):
    return [
        prediction_record(i, i["case"], round(0.5 + (7 * i["gid"]) % 45 / 100, 2))
        for i in instances
        if i["case"] != "missed"
    ]


def predictions_b(instances):
    return [
        prediction_record(i, "shift2", round(0.5 + (11 * i["gid"]) % 45 / 100, 2))
        for i in instances
    ]


def with_metrics(instances, case_override=None):
    out = []
    for inst in instances:
        case = case_override or inst["case"]
        out.append({**inst, "case": case, "metrics": instance_metrics(case, inst["rect"])})
    return out


def main():
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    park = build_instances()
    scored_a = with_metrics(park)
    scored_b = with_metrics(park, case_override="shift2")

    def write(name, text):
        (FIXTURE_DIR / name).write_text(text)
        print(f"wrote {name}")

    write("fixture_gt.json", json.dumps(ground_truth_json(park), indent=2) + "\n")
    write("fixture_scene_tags.json", json.dumps(scene_tags_json(park), indent=2) + "\n")
    write("fixture_predictions_a.json", json.dumps(predictions_a(park), indent=2) + "\n")
    write("fixture_predictions_b.json", json.dumps(predictions_b(park), indent=2) + "\n")
    write("expected_report_a.csv", render_report(scored_a))
    write("expected_report_b.csv", render_report(scored_b))
    write("expected_comparison.csv", render_comparison(scored_a, scored_b))
    for label, stratum in strata(scored_a):
        write(f"expected_curve_{label}_a.csv", render_curve(stratum))
        write(f"expected_sweep_{label}_a.csv", render_sweep(stratum))

    for label, stratum in strata(scored_a):
        agg = aggregate(stratum)
        cells = ", ".join(f"{c}={fmt3(agg[c])}" for c in REPORT_COLUMNS)
        print(f"{label}: n={agg['n']} {cells}")


if __name__ == "__main__":
    main()
