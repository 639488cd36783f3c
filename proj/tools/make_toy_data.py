#!/usr/bin/env python3
"""Regenerates the bundled toy datasets under data/. Deterministic."""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"

CAPTIONS = [
    "a dog runs on the grass",
    "a cat sits on the street",
    "a man plays with a frisbee",
    "a woman sits with a cat",
    "a red bus on the street",
    "a dog plays with a red ball",
    "a man runs on the street",
    "a cat plays with a ball",
    "a woman runs with a dog",
    "a red ball on the grass",
]

# attribute terms present in each caption, after merging
CAPTION_ATTRIBUTES = [
    ["dog", "run", "grass"],
    ["cat", "sit", "street"],
    ["man", "play", "frisbee"],
    ["woman", "sit", "cat"],
    ["red", "bus", "street"],
    ["dog", "play", "red", "ball"],
    ["man", "run", "street"],
    ["cat", "play", "ball"],
    ["woman", "run", "dog"],
    ["red", "ball", "grass"],
]

QUESTIONS = [
    ("what is in the picture", ["dog", "cat", "man", "woman", "bus", "dog", "man", "cat", "woman", "ball"]),
    ("what is it doing", ["running", "sitting", "playing frisbee", "sitting", "parked", "playing", "running",
                          "playing", "running", "lying on grass"]),
]

COMMENTS = {
    "dog": "The domestic dog is a domesticated descendant of the wolf. Dogs were the first species to be "
           "domesticated by humans and have been selectively bred for behaviours, sensory capabilities and physical "
           "attributes. Dogs are kept as pets and work alongside people in herding, hunting and guarding.",
    "cat": "The cat is a small domesticated carnivorous mammal. It is the only domesticated species in the family "
           "Felidae. Cats are valued by humans for companionship and for their ability to kill vermin such as mice "
           "and rats.",
    "frisbee": "A frisbee is a gliding toy or sporting item that is generally plastic and roughly 20 to 25 "
               "centimetres in diameter with a pronounced lip. It is used recreationally and competitively for "
               "throwing and catching, as in flying disc games.",
    "grass": "Grasses are a large family of monocotyledonous flowering plants. They include the cereal grasses, "
             "bamboos and the grasses of natural grassland and cultivated lawns and pasture.",
    "ball": "A ball is a round object with various uses. It is used in ball games, where the play of the game "
            "follows the state of the ball as it is hit, kicked or thrown by players.",
    "bus": "A bus is a road vehicle designed to carry many passengers. Buses can have a capacity as high as 300 "
           "passengers and are widely used for public transport in cities.",
    "street": "A street is a public thoroughfare in a built environment. It is a public parcel of land adjoining "
              "buildings in an urban context, on which people may freely assemble, interact, and move about.",
    "red": "Red is the color at the long wavelength end of the visible spectrum of light, next to orange and "
           "opposite violet. It is the color of blood, fire and ripe strawberries.",
    "man": "A man is an adult male human. Prior to adulthood, a male human is referred to as a boy.",
    "woman": "A woman is an adult female human. Prior to adulthood, a female human is referred to as a girl.",
    "run": "Running is a method of terrestrial locomotion allowing humans and other animals to move rapidly on foot. "
           "Running is a type of gait characterized by an aerial phase in which all feet are above the ground.",
    "sit": "Sitting is a basic action and resting position in which the body weight is supported primarily by the "
           "buttocks in contact with the ground or a horizontal object such as a chair seat.",
    "play": "Play is a range of intrinsically motivated activities done for recreational pleasure and enjoyment. "
            "Play is commonly associated with children and with games, toys and sport.",
}

TOPICS = {
    "animals": "dog cat wolf pet fur tail bark meow paw puppy kitten leash bone hunt mammal".split(),
    "transport": "bus car road street wheel engine driver traffic ticket station passenger route truck fuel city".split(),
}

RETRIEVED_AT = "2026-01-01T00:00:00Z"


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def write_jsonl(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as f:
        if header is not None:
            f.write(json.dumps(header) + "\n")
        for r in rows:
            f.write(json.dumps(r) + "\n")


def region_features(rng, present_dims, dim, regions=3, shift=3.0):
    feats = [[round(rng.uniform(-1, 1), 4) for _ in range(dim)] for _ in range(regions)]
    for d in present_dims:
        feats[rng.randrange(regions)][d] += shift
        feats = [[round(x, 4) for x in row] for row in feats]
    return feats


def caption_set(rng):
    terms = sorted({t for attrs in CAPTION_ATTRIBUTES for t in attrs})
    out = DATA / "toy"
    write_jsonl(out / "captions.jsonl", None,
                [{"image_id": f"img{i:02d}", "captions": [c]} for i, c in enumerate(CAPTIONS)])
    rows = []
    for i, attrs in enumerate(CAPTION_ATTRIBUTES):
        rows.append({"image_id": f"img{i:02d}",
                     "regions": region_features(rng, [terms.index(a) for a in attrs], len(terms))})
    write_jsonl(out / "features.jsonl", {"version": "v1", "dim": len(terms)}, rows)


def attribute_set(rng):
    out = DATA / "toy" / "attributes"
    captions, rows = [], []
    kinds = [("a dog sitting", [0]), ("a cat sitting", [1]), ("a dog and a cat", [0, 1]), ("an empty room", [])]
    for i in range(40):
        text, dims = kinds[i % 4]
        image_id = f"sep{i:02d}"
        captions.append({"image_id": image_id, "captions": [text]})
        rows.append({"image_id": image_id, "regions": region_features(rng, dims, 4)})
    write_jsonl(out / "captions.jsonl", None, captions)
    write_jsonl(out / "features.jsonl", {"version": "v1", "dim": 4}, rows)


def qa_set(rng):
    rows = []
    for i in range(len(CAPTIONS)):
        for question, answers in QUESTIONS:
            answer = answers[i]
            humans = [answer] * 7 + rng.sample(["yes", "no", "something", "not sure", "outside"], 3)
            rng.shuffle(humans)
            rows.append({"image_id": f"img{i:02d}", "question": question, "answer": answer,
                         "human_answers": humans})
    write_jsonl(DATA / "toy" / "qa.jsonl", None, rows)


def paragraph_corpus(rng):
    rows = []
    for topic, words in TOPICS.items():
        for d in range(10):
            rows.append({"id": f"{topic}{d}", "topic": topic,
                         "text": " ".join(rng.choice(words) for _ in range(40))})
    write_jsonl(DATA / "toy" / "paragraphs.jsonl", None, rows)


def kb_fixtures():
    responses = DATA / "kb" / "responses"
    responses.mkdir(parents=True, exist_ok=True)
    cache = DATA / "toy" / "kb_cache"
    (cache / "objects").mkdir(parents=True, exist_ok=True)
    entries = []
    for attr, text in sorted(COMMENTS.items()):
        uri = f"http://dbpedia.org/resource/{attr.capitalize()}"
        body = {"head": {"vars": ["entry", "comment"]},
                "results": {"distinct": False, "ordered": True, "bindings": [
                    {"entry": {"type": "uri", "value": uri},
                     "comment": {"type": "literal", "xml:lang": "en", "value": text}}]}}
        (responses / f"{attr}.json").write_text(json.dumps(body, indent=2) + "\n")
        name = f"objects/{fnv1a64(text.encode()):016x}.txt"
        (cache / name).write_text(text)
        entries.append({"attribute": attr, "file": name, "source_uri": uri, "retrieved_at": RETRIEVED_AT})
    empty = {"head": {"vars": ["entry", "comment"]}, "results": {"distinct": False, "ordered": True, "bindings": []}}
    (responses / "_empty.json").write_text(json.dumps(empty, indent=2) + "\n")
    (cache / "manifest.json").write_text(json.dumps({"version": "v1", "entries": entries}, indent=2) + "\n")


def taxonomies():
    tax = DATA / "taxonomy"
    tax.mkdir(parents=True, exist_ok=True)
    (tax / "five_node.txt").write_text("entity\nanimal entity\nvehicle entity\ndog animal\ncat animal\n")
    lines = ["entity", "object entity", "living_thing entity", "action entity", "place entity", "color entity",
             "animal living_thing", "person living_thing", "dog animal", "cat animal", "man person", "woman person",
             "ball object", "frisbee object", "vehicle object", "bus vehicle", "grass place", "street place",
             "red color", "running action", "sitting action", "playing action", "parked action",
             "playing_frisbee playing", "lying_on_grass action"]
    (DATA / "toy" / "taxonomy.txt").write_text("\n".join(lines) + "\n")


def main():
    rng = random.Random(20240601)
    caption_set(rng)
    attribute_set(rng)
    qa_set(rng)
    paragraph_corpus(rng)
    kb_fixtures()
    taxonomies()


if __name__ == "__main__":
    main()
