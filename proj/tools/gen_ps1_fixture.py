#!/usr/bin/env python3
"""Generates the bundled PS1 (sit-to-stand) scripted session.

Writes problem.json, config.json and transcript.json into the output
directory (default tests/fixtures/ps1). The embedding table is laid out so
that the pipeline reaches these per-agent counts:

  muse 8, forge 75, gatekeeper 32, librarian 10, challenger 11, mint 20,
  scout 400, navigator 13, sentinel 24

Vector layout (64 dimensions, one-hot axes):
  0-9    literature directions L
  10-20  offsets f that keep non-novel ideas apart from each other
  21-31  novel idea directions
  32-46  navigator directions
  47-63  near-duplicate perturbations
"""

import argparse
import json
import math
import os

DIM = 64
LIT_SIM = 0.87
DUP_EPS = 0.03


def axis(i):
    v = [0.0] * DIM
    v[i] = 1.0
    return v


def add(a, b, s=1.0):
    return [x + s * y for x, y in zip(a, b)]


def scale(a, s):
    return [x * s for x in a]


def emb_text(idea):
    return "Idea: {title}. Action: {action}. Object: {object}. Context: {context}".format(**idea)


PROBLEM = {
    "problem_text": (
        "Elderly individuals find it hard to move between sitting and standing. "
        "Ordinary chairs give them no help, so they depend on carers or grab whatever "
        "furniture is nearby. We want home-friendly products that let them sit down and "
        "stand up safely and independently."
    ),
    "ideas": [],
}

SCRIBE = {
    "activity": "Assisting with the transition between sitting and standing.",
    "item": "Elderly individuals using chairs.",
    "contradiction": "Users need support to sit/stand independently, but conventional chairs offer no assistance.",
    "criteria": ["Enables independence", "Reduces external assistance", "Maintains comfort"],
    "constraints": ["Must be safe", "Easy to use", "Affordable", "Compatible with home environments"],
}

# Building blocks for distinct, on-topic ideas.
MECHANISMS = [
    ("Spring-Loaded", "Stores energy while sitting and releases it to push upward", "spring seat frame"),
    ("Pneumatic", "Raises the seat with a quiet air cylinder", "air-lift cylinder"),
    ("Counterweight", "Balances the user's weight with a sliding mass", "counterweight rail"),
    ("Magnetic", "Locks and unlocks support arms with magnets", "magnetic armrest"),
    ("Tilting", "Tilts the seat forward to shift weight over the feet", "tilting seat pan"),
    ("Telescopic", "Extends a grab pole from the floor to the ceiling", "telescopic pole"),
    ("Inflatable", "Inflates a cushion under the thighs to lift gently", "air bladder cushion"),
    ("Rocking", "Uses a rocking base to build momentum for rising", "rocker base"),
    ("Motorized", "Drives a lifting linkage with a small motor", "lift linkage"),
    ("Hydraulic", "Raises the whole chair with a hydraulic column", "hydraulic column"),
    ("Elastic", "Assists knee extension with elastic straps", "knee strap"),
    ("Rotating", "Swivels the seat so the user faces the exit path", "swivel plate"),
    ("Sensor-Guided", "Detects the start of rising and adds support", "pressure sensor pad"),
    ("Folding", "Unfolds a step and handle in front of the chair", "fold-out step"),
    ("Weighted", "Keeps the chair planted while the user pushes off", "weighted base"),
    ("Voice-Activated", "Starts the lift when the user asks for help", "voice control unit"),
    ("Ratcheting", "Holds intermediate heights like a jack", "ratchet lift"),
    ("Cable-Assisted", "Pulls the user up with a ceiling cable and harness", "overhead cable"),
    ("Sliding", "Slides the seat forward before lifting", "seat slider"),
    ("Gel-Filled", "Firms under load to give a stable push-off surface", "gel cushion"),
    ("Textured", "Adds grip where hands and feet push", "grip texture"),
    ("Heated", "Warms stiff joints before standing", "heated pad"),
    ("Vibrating", "Cues the user to shift weight at the right moment", "haptic cue pad"),
    ("Modular", "Clips onto existing chairs of many shapes", "clip-on module"),
    ("Bamboo", "Offers a light natural-fibre frame with spring", "bamboo frame"),
    ("Wearable", "Supports the knees from a soft exosuit", "soft exosuit"),
    ("Foot-Pedal", "Raises the seat when the user presses a pedal", "foot pedal lift"),
    ("Arm-Lever", "Multiplies arm force through a long lever", "lever handle"),
    ("Gyroscopic", "Steadies sway during the transition", "gyro stabilizer"),
    ("Wall-Mounted", "Folds a support frame out from the wall", "wall bracket"),
    ("Bed-Side", "Anchors a rail between bed frame and floor", "bedside rail"),
    ("Car-Seat", "Lifts the user out of a car seat", "car seat lifter"),
    ("Bath", "Lowers and raises the user in the bath", "bath lift"),
]

SETTINGS = [
    "for elderly users living alone",
    "in small apartments",
    "in shared lounges of care homes",
    "beside the bed at night",
    "at the kitchen table",
    "after hip or knee surgery",
    "for users with arthritis in the hands",
    "in bathrooms where floors get wet",
    "while travelling to family homes",
    "for users with limited balance",
    "in waiting rooms and clinics",
]


class Builder:
    def __init__(self):
        self.counter = 0
        self.titles = set()

    def idea(self, title=None, action=None, object=None, context=None):
        k = self.counter
        self.counter += 1
        m = MECHANISMS[k % len(MECHANISMS)]
        s = SETTINGS[(k * 7 + k // len(MECHANISMS)) % len(SETTINGS)]
        variant = k // len(MECHANISMS)
        t = title or "{} {} Mk{}".format(m[0], m[2].title(), variant + 1)
        assert t not in self.titles, t
        self.titles.add(t)
        return {
            "title": t,
            "action": action or m[1],
            "object": object or m[2],
            "context": context or "Used {} to rise and sit without help".format(s),
        }


def near_dup(vec, k):
    return add(vec, axis(47 + (k % 17)), DUP_EPS)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures", "ps1"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    b = Builder()
    table = {}

    # --- base vectors for the 32 ideas the Gatekeeper shortlists --------------
    s = math.sqrt(1 - LIT_SIM ** 2)
    non_novel = []  # 21 vectors, each 0.87 similar to one literature direction
    f_axis = 10
    for li in range(9):
        L = scale(axis(li), LIT_SIM)
        non_novel.append(add(L, axis(f_axis), s))
        non_novel.append(add(L, axis(f_axis), -s))
        f_axis += 1
    L = scale(axis(9), LIT_SIM)
    for ang in (0, 120, 240):
        r = math.radians(ang)
        off = add(scale(axis(f_axis), math.cos(r)), axis(f_axis + 1), math.sin(r))
        non_novel.append(add(L, off, s))
    f_axis += 2
    assert f_axis == 21
    novel = [axis(21 + j) for j in range(11)]

    # Which of the 32 shortlisted bases are novel, in creation order.
    novel_slots = {1, 4, 7, 10, 13, 16, 19, 22, 25, 28, 31}
    bases = []
    nn = iter(non_novel)
    nv = iter(novel)
    for i in range(32):
        bases.append(next(nv) if i in novel_slots else next(nn))

    # --- round plan -------------------------------------------------------------
    # Round 1: 8 Muse ideas (6 bases + 2 duplicates) and 10 Forge ideas
    # (6 bases + 4 duplicates). Rounds 2-7: 3 bases + 7 duplicates each.
    # Round 8: 2 bases + 3 duplicates (5 ideas, the end of the budget).
    base_ideas = []  # (idea, vector)
    dup_k = 0
    dup_sources = []  # (duplicate, its base)

    def new_base(**kw):
        idea = b.idea(**kw)
        vec = bases[len(base_ideas)]
        base_ideas.append((idea, vec))
        table[emb_text(idea)] = vec
        return idea

    def new_dup(of_index):
        nonlocal dup_k
        src_idea, src_vec = base_ideas[of_index]
        idea = b.idea()
        vec = near_dup(src_vec, dup_k)
        dup_k += 1
        dup_sources.append((idea, src_idea))
        table[emb_text(idea)] = vec
        return idea

    muse_texts = []
    muse_replies = []
    exoskeleton_muse = {
        "title": "Bio-mimetic Support Exoskeleton",
        "action": "Attach and Support",
        "object": "Exoskeleton",
        "context": "Reducing muscular load on knee extensor muscles for elderly users during sit-to-stand transitions",
    }
    muse_raw = [
        "A bio-mimetic structure attached to the human body to reduce the muscular load on the knee when standing up.",
        "A cushion that pushes up when you lean forward.",
        "Armrests that slide forward so you can push off them better.",
        "A chair whose seat tilts forward a little to help you stand.",
        "A pole next to the sofa to grab onto.",
        "A small step stool that pops out of the chair front.",
        "Exoskeleton legs that help the knees, a lighter version.",
        "A springy cushion that gives a boost, like the first one.",
    ]
    muse_ideas = [
        new_base(**exoskeleton_muse),
        new_base(),
        new_base(),
        new_base(),
        new_base(),
        new_base(),
    ]
    muse_ideas.append(new_dup(0))
    muse_ideas.append(new_dup(1))
    for text, idea in zip(muse_raw, muse_ideas):
        muse_texts.append(text)
        muse_replies.append({"role": "muse", "match": text, "response": idea})

    forge = []  # (role, [ideas])
    balloon = {
        "title": "Balloon Cloud Chair",
        "action": "Inflates and deflates rhythmically to gently lift or lower the user",
        "object": "Chair-shaped cluster of responsive balloons",
        "context": "Elderly individuals can rise or sit as if buoyed by a cloud, at home",
    }
    push_up = {
        "title": "Removable Push-Up Cushion",
        "action": "Providing extra firmness and spring-back when needed.",
        "object": "Seat Cushion",
        "context": "Elderly users placing or removing a supportive cushion on existing chairs",
    }

    def round_ideas(n_bases, n_dups, first_kw=None, second_kw=None):
        out = []
        for i in range(n_bases):
            kw = {}
            if i == 0 and first_kw:
                kw = first_kw
            if i == 1 and second_kw:
                kw = second_kw
            out.append(new_base(**kw))
        # duplicates cycle over every shortlisted base created so far
        for _ in range(n_dups):
            out.append(new_dup(round_ideas.cursor % len(base_ideas)))
            round_ideas.cursor += 1
        return out

    round_ideas.cursor = 2

    plan = [(6, 4)] + [(3, 7)] * 6 + [(2, 3)]
    forge_rounds = []
    for r, (nb, nd) in enumerate(plan, start=1):
        if r == 1:
            ideas = round_ideas(nb, nd, push_up, balloon)
            # Formulator gets the push-up cushion, Explorer the balloon chair.
            formulator = [ideas[0]] + ideas[2:6]
            explorer = [ideas[1]] + ideas[6:10]
        else:
            ideas = round_ideas(nb, nd)
            nf = (len(ideas) + 1) // 2
            formulator = ideas[:nf]
            explorer = ideas[nf:]
        forge_rounds.append((formulator, explorer))

    assert len(base_ideas) == 32, len(base_ideas)
    assert sum(len(f) + len(e) for f, e in forge_rounds) == 75

    # Creation order inside a round: Formulator drafts first, then Explorer.
    # Bases must precede their own duplicates so the medoid tie-break (lowest
    # id) promotes the base in Raw-only clusters.
    order = muse_ideas[:]
    for f, e in forge_rounds:
        order += f + e
    pos = {id(x): i for i, x in enumerate(order)}
    assert all(pos[id(d)] > pos[id(src)] for d, src in dup_sources)

    # --- literature ---------------------------------------------------------------
    lit_entries = [{
        "title": "SitnStand Portable Smart Rising Seat",
        "action": "Inflates and deflates via simple controls to gently lift the user",
        "object": "Battery-powered inflatable seat cushion",
        "context": "Home and outdoor use for elderly users who need help rising",
        "source_url": "https://www.sitnstand.com",
    }]
    lit_more = [
        ("UpEasy Seat Assist", "Lifts the user with a spring-loaded seat", "Portable lifting cushion"),
        ("Power Lift Recliner", "Tilts the whole chair forward with a motor", "Motorized recliner"),
        ("Stander Couch Cane", "Gives a fixed handle to push against", "Sofa support handle"),
        ("Security Pole and Curve Grab Bar", "Provides a floor-to-ceiling grip", "Tension-mounted pole"),
        ("Carex Uplift Premium Seat Assist", "Assists rising with gas springs", "Lever-lift cushion"),
        ("Exoskeleton knee assist (research)", "Applies knee torque during rising", "Powered knee orthosis"),
        ("Sit-to-stand lift (care)", "Raises users with a sling and mast", "Patient transfer lift"),
        ("Chair raiser blocks", "Raises the seat height permanently", "Furniture riser set"),
        ("Swivel seat cushion", "Rotates the user toward the exit", "Rotating cushion"),
    ]
    for t, a, o in lit_more:
        lit_entries.append({
            "title": t,
            "action": a,
            "object": o,
            "context": "Commercial or research solution for elderly sit-to-stand support",
            "source_url": "https://example.org/prior/" + t.lower().replace(" ", "-").replace("(", "").replace(")", ""),
        })
    for i, e in enumerate(lit_entries):
        table[emb_text(e)] = axis(i)
    search_results = [{"title": e["title"], "url": e["source_url"], "snippet": e["action"]} for e in lit_entries]

    # --- mint / scout ------------------------------------------------------------
    actions = [
        "Elevates and stabilizes the user during the transition",
        "Guides and encourages posture alignment while rising",
        "Supports and cushions the body throughout the movement",
        "Transforms and adapts to the user's weight distribution",
        "Engages and retracts to offer adjustable support",
        "Senses and signals the right moment to stand",
        "Rotates and positions the user toward the exit path",
        "Locks and releases at intermediate heights",
        "Warms and loosens stiff joints before rising",
        "Counterbalances the user's shifting weight",
        "Anchors and steadies the chair against sliding",
        "Extends and offers a handhold within reach",
        "Inflates and firms beneath the thighs",
        "Tilts and shifts weight over the feet",
        "Absorbs and softens the descent into the seat",
        "Clips onto and upgrades an existing chair",
        "Lights and marks the path after standing",
        "Records and reports each transition to carers",
        "Folds away and frees floor space when unused",
        "Pulls gently upward through a harness",
    ]
    objects = [
        "Adjustable armrests with ergonomic grips",
        "Ergonomic transition mat with pressure sensors",
        "Flexible base platform with shock absorbers",
        "Non-slip texture surface",
        "Reinforced seat back",
        "Gas spring seat insert",
        "Retractable safety belt",
        "Foldable floor step",
        "Telescopic grab pole",
        "Swivel seat plate",
        "Inflatable thigh bladder",
        "Weighted chair base",
        "Heated knee wrap",
        "Vibration cue pad",
        "Motorized lift linkage",
        "Clip-on armrest extender",
        "Under-seat night light",
        "Wearable knee exosuit",
        "Tension-mounted ceiling pole",
        "Overhead harness rail",
    ]
    assert len(actions) == 20 and len(objects) == 20

    def score(a, o):
        if (a, o) in ((3, 3), (4, 4)):
            return 10
        return 1 + (a * 7 + o * 3 + (a * o) % 5) % 9  # 1..9

    scout_entries = []
    for a, act in enumerate(actions):
        scores = []
        for o in range(20):
            sc = score(a, o)
            scores.append({"object_index": o, "score": sc, "rationale": "feasible with current parts" if sc >= 7 else "hard to build or use"})
        scout_entries.append({"role": "scout", "match": "Action: " + act + "\n", "response": {"scores": scores}})

    pairs = []
    for a in range(20):
        for o in range(20):
            pairs.append((-score(a, o), a, o))
    pairs.sort()
    top = pairs[:15]

    # --- navigator: 15 drafts, drafts 7 and 12 repeat drafts 3 and 9 --------------
    nav_titles = {
        0: "Adaptive Grip Platform",
        1: "Integrated Safety Belt with Retractable Assistance",
    }
    nav_drafts = []
    nav_vecs = []
    nav_base = 0
    dup_of = {7: 3, 12: 9}
    for i, (_, a, o) in enumerate(top):
        title = nav_titles.get(i, "Navigator Concept {:02d}".format(i + 1))
        d = {
            "title": title,
            "action": actions[a],
            "object": objects[o],
            "context": "Elderly users at home combine {} with {}".format(actions[a].lower(), objects[o].lower()),
        }
        if i in dup_of:
            vec = near_dup(nav_vecs[dup_of[i]], i)
        else:
            vec = axis(32 + nav_base)
            nav_base += 1
        nav_drafts.append(d)
        nav_vecs.append(vec)
        table[emb_text(d)] = vec
    assert nav_base == 13

    # --- sentinel: 24 candidates, all relevant; two contexts polished -------------
    # Candidate order is vault order: the 11 Challenger survivors, then the 13
    # kept Navigator ideas.
    novel_bases = sorted([(x, v) for x, v in base_ideas if v in novel], key=lambda xv: pos[id(xv[0])])
    survivors = [x for x, _ in novel_bases]
    kept_nav = [d for i, d in enumerate(nav_drafts) if i not in dup_of]
    candidates = survivors + kept_nav
    assert len(candidates) == 24
    verdicts = []
    polish = {2: "Used at home by elderly users living alone, with a handle placed at hip height",
              14: "Elderly users at home rising from low sofas with a reachable handhold"}
    cand_vecs = [v for _, v in novel_bases] + [v for i, v in enumerate(nav_vecs) if i not in dup_of]
    for i, c in enumerate(candidates):
        if i in polish:
            verdicts.append({"index": i, "verdict": "polish", "rationale": "relevant; context tightened", "context": polish[i]})
            pc = dict(c)
            pc["context"] = polish[i]
            table[emb_text(pc)] = cand_vecs[i]
        else:
            verdicts.append({"index": i, "verdict": "keep", "rationale": "meets criteria and constraints"})

    # --- director ------------------------------------------------------------------
    director_entries = []
    for c in candidates:
        if c["title"] == "Integrated Safety Belt with Retractable Assistance":
            pfic = {
                "principle": "Providing adjustable mechanical support through a retractable safety belt that assists users in sitting and standing",
                "features": ["Retractable safety belt", "Adjustable tension control", "Automatic engagement during transitions"],
                "implementation": [
                    "Incorporate a motorized retracting mechanism within the chair frame",
                    "Use sensors to detect user movement and adjust belt tension",
                ],
                "characteristics": ["Safe and reliable support", "User-friendly automatic operation", "Compatible with home chairs"],
            }
        else:
            pfic = {
                "principle": "Providing support by combining {} with {}".format(c["action"].lower(), c["object"].lower()),
                "features": [c["object"], "Simple one-hand control"],
                "implementation": ["Prototype the " + c["object"].lower(), "Test with elderly users at home"],
                "characteristics": ["Safe in daily use", "Affordable to produce"],
            }
        director_entries.append({"role": "director", "match": "Idea: " + c["title"] + "\n", "response": pfic})

    # --- transcript ------------------------------------------------------------------
    chat = [{"role": "scribe", "response": SCRIBE}]
    chat += muse_replies
    for f, e in forge_rounds:
        chat.append({"role": "forge_formulator", "response": {"ideas": f}})
        chat.append({"role": "forge_explorer", "response": {"ideas": e}})
    chat.append({"role": "librarian", "response": {"entries": lit_entries}})
    chat.append({"role": "mint", "response": {"actions": actions, "objects": objects}})
    chat += scout_entries
    chat.append({"role": "navigator", "response": {"ideas": nav_drafts}})
    chat.append({"role": "sentinel", "response": {"verdicts": verdicts}})
    chat += director_entries

    transcript = {
        "chat": chat,
        "search": [{"results": search_results}],
        "embeddings": {"model_tag": "ps1-scripted-64", "dimension": DIM, "vectors": table},
    }
    problem = dict(PROBLEM)
    problem["ideas"] = muse_texts
    config = {
        "session": {
            "gatekeeper_eps": 0.3,
            "gatekeeper_min_pts": 2,
            "challenger_threshold": 0.85,
            "mint_list_size": 20,
            "scout_top_k": 15,
            "scout_batched": True,
            "max_rounds": 8,
            "raw_idea_budget": 75,
            "search_limit": 10,
        },
        "providers": {
            "transcript": "transcript.json",
            "chat": {"kind": "scripted"},
            "embedding": {"kind": "scripted"},
            "search": {"kind": "scripted"},
            "image": {"kind": "placeholder"},
        },
    }
    for name, doc in (("problem.json", problem), ("config.json", config), ("transcript.json", transcript)):
        with open(os.path.join(args.out, name), "w") as fh:
            json.dump(doc, fh, indent=1, ensure_ascii=False)
            fh.write("\n")


if __name__ == "__main__":
    main()
