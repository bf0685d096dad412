#!/usr/bin/env python3
"""Regenerates the static fixtures under data/. Output is deterministic.

Configuration files under data/configs are produced by the citywall binary
itself (see README); this script only writes inputs.
"""
import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent


def region_xml(region_id, yaw, pitch, roll, left, right, up, down, xres=2560, yres=1600):
    return f"""      <region id="{region_id}" xResolution="{xres}" yResolution="{yres}" x="0" y="0" xsize="1" ysize="1">
        <frustum>
          <yaw>{yaw}</yaw>
          <pitch>{pitch}</pitch>
          <roll>{roll}</roll>
          <rightAngle>{right}</rightAngle>
          <leftAngle>{left}</leftAngle>
          <upAngle>{up}</upAngle>
          <downAngle>{down}</downAngle>
        </frustum>
        <coordinateFrame>
          <posx>0</posx><posy>0</posy><posz>0</posz>
        </coordinateFrame>
      </region>"""


def mpcdi(regions):
    body = "\n".join(regions)
    return f"""<?xml version="1.0" encoding="UTF-8"?>
<MPCDI profile="3d" geometry="1" version="1.0">
  <display>
    <buffer id="cluster" xResolution="12800" yResolution="1600">
{body}
    </buffer>
  </display>
</MPCDI>
"""


def calibration():
    out = HERE / "calibration"
    # Five projectors around a dome, tilted up, slightly asymmetric frusta.
    dome = [
        region_xml(str(i + 1), yaw, 30.0, 0.0, 38.5, 37.5, 32.0, 26.0)
        for i, yaw in enumerate([-144.0, -72.0, 0.0, 72.0, 144.0])
    ]
    (out / "dome5.xml").write_text(mpcdi(dome))
    (out / "single45.xml").write_text(mpcdi([region_xml("1", 0, 0, 0, 45, 45, 45, 45)]))
    flat = [
        region_xml("left", 0, 0, 0, 30, 10, 20, 20),
        region_xml("right", 0, 0, 0, 10, 30, 20, 20),
    ]
    (out / "flat2.xml").write_text(mpcdi(flat))
    broken = region_xml("1", 0, 0, 0, 45, 45, 45, 45).replace("<frustum>", "<notAFrustum>").replace(
        "</frustum>", "</notAFrustum>")
    (out / "missing_frustum.xml").write_text(mpcdi([broken]))


SERVICES = {
    "customers-service": {
        "config": ["MetricConfig", "WebConfig", "CacheConfig"],
        "model": ["Owner", "Pet", "PetType", "OwnerRepository", "PetRepository", "PetTypeRepository",
                  "NamedEntity", "BaseEntity", "OwnerValidator", "PetValidator"],
        "web": ["OwnerResource", "PetResource", "OwnerRequest", "PetRequest", "PetDetails",
                "ResourceNotFoundException", "OwnerEntityMapper", "PetEntityMapper"],
        "web/mapper": ["Mapper", "OwnerMapper", "PetMapper"],
        "": ["CustomersServiceApplication"],
    },
    "vets-service": {
        "config": ["CacheConfig", "VetsProperties", "MetricConfig"],
        "model": ["Vet", "Specialty", "VetRepository", "SpecialtyRepository", "NamedEntity"],
        "web": ["VetResource", "VetDto", "VetExceptionHandler"],
        "system": ["CacheWarmup", "StartupRunner"],
        "": ["VetsServiceApplication"],
    },
    "visits-service": {
        "config": ["MetricConfig", "ClockConfig"],
        "model": ["Visit", "VisitRepository", "VisitValidator", "VisitQuery"],
        "web": ["VisitResource", "VisitRequest", "Visits", "VisitExceptionHandler",
                "VisitsBatchResource"],
        "": ["VisitsServiceApplication"],
    },
}

ROOT_CHAIN = ["org", "springframework", "samples", "petclinic"]


def structure():
    rng = random.Random(20240611)
    apps = []
    for app, groups in SERVICES.items():
        leaf = app.split("-")[0]
        service_pkg = {"name": leaf, "subPackages": [], "classes": []}
        subs = {}
        for group, classes in groups.items():
            entries = [{"name": c, "methodCount": rng.randint(1, 24)} for c in classes]
            if group == "":
                service_pkg["classes"].extend(entries)
                continue
            parts = group.split("/")
            parent = service_pkg
            for part in parts:
                key = (id(parent), part)
                if key not in subs:
                    pkg = {"name": part, "subPackages": [], "classes": []}
                    parent["subPackages"].append(pkg)
                    subs[key] = pkg
                parent = subs[key]
            parent["classes"].extend(entries)
        # Shared utility package with a few helpers per service.
        service_pkg["subPackages"].append({
            "name": "util",
            "classes": [{"name": f"Util{i}", "methodCount": rng.randint(0, 6)} for i in range(14)],
        })
        service_pkg["subPackages"].append({
            "name": "api",
            "classes": [{"name": f"Endpoint{i}", "methodCount": rng.randint(2, 70)} for i in range(8)],
        })
        node = service_pkg
        for name in reversed(ROOT_CHAIN):
            node = {"name": name, "subPackages": [node]}
        apps.append({"name": app, "language": "java", "packages": [node]})
    doc = {"applications": apps}
    (HERE / "structure" / "petclinic.json").write_text(json.dumps(doc, indent=2) + "\n")
    return doc


def walk_classes(doc):
    out = []
    for app in doc["applications"]:
        def visit(pkg, path):
            path = path + [pkg["name"]]
            for c in pkg.get("classes", []):
                out.append(".".join([app["name"]] + path + [c["name"]]))
            for sub in pkg.get("subPackages", []):
                visit(sub, path)
        for p in app["packages"]:
            visit(p, [])
    return out


def traces(doc):
    rng = random.Random(7)
    classes = walk_classes(doc)
    methods = ["handle", "find", "save", "load", "map", "validate", "get"]
    lines = []
    span_counter = 0
    trace_counter = 0
    t = 1_700_000_000_000_000_000
    while span_counter < 100:
        trace_counter += 1
        trace_id = f"t{trace_counter:03d}"
        spans = []
        size = min(rng.randint(5, 14), 100 - span_counter)
        for i in range(size):
            span_counter += 1
            span_id = f"s{span_counter:04d}"
            parent = None if i == 0 else rng.choice(spans)
            if parent is not None and rng.random() < 0.15:
                cls = parent["cls"]  # call inside the same class
            else:
                cls = rng.choice(classes)
            method = f"{cls}.{rng.choice(methods)}"
            if span_counter in (37, 81):
                method = "gateway-service.org.edge.Router.route"  # unmodeled
            start = t + span_counter * 1000
            spans.append({"id": span_id, "cls": cls, "parent": parent, "method": method,
                          "start": start, "end": start + rng.randint(10, 900)})
        for s in spans:
            lines.append(json.dumps({
                "traceId": trace_id,
                "spanId": s["id"],
                "parentSpanId": s["parent"]["id"] if s["parent"] else None,
                "methodFqn": s["method"],
                "startNanos": s["start"],
                "endNanos": s["end"],
            }))
    (HERE / "traces" / "petclinic-100.jsonl").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    calibration()
    traces(structure())
