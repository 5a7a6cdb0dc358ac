#!/usr/bin/env python3
"""Regenerate the shipped wordlist data files under src/rocoforge/data/.

The concept groups reconstruct the GRIT-style grouping of common caption
nouns plus seven extra groups (material, color, direction, vehicle_part,
shape, event, number) whose sizes are pinned by tests. Group membership is
curated to be disjoint; this script fails if a lemma lands in two groups.

The noun lexicon is the union of the concrete-noun groups, naive plural
forms, and a hand list of caption-frequent nouns that belong to no group.
The vocabulary file is a larger mixed-POS pool of plain [a-z]+ words used
by the random-substitution policy.
"""

from __future__ import annotations

import re
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "rocoforge" / "data"

GROUPS: dict[str, list[str]] = {
    # ------- base groups (counts free) -------
    "person": """man woman boy girl child baby person guy lady gentleman toddler teenager
        adult crowd player rider skier surfer snowboarder skateboarder pedestrian chef
        waiter officer clown bride groom farmer worker athlete""".split(),
    "animal": """dog cat horse sheep cow elephant bear zebra giraffe bird monkey lion tiger
        duck goose swan pigeon seagull eagle owl rabbit squirrel deer goat pig chicken
        penguin dolphin whale fish""".split(),
    "food": """pizza sandwich hamburger hotdog pasta salad soup bread cheese cake donut
        cookie pie pancake waffle bacon egg sausage steak rice noodle apple banana
        broccoli carrot tomato potato lettuce onion pepper""".split(),
    "drink": "coffee tea juice milk soda beer wine water cocktail lemonade smoothie cocoa".split(),
    "vehicle": """car truck bus motorcycle bicycle bike train airplane plane boat ship van
        taxi scooter moped tractor trolley subway helicopter jet sailboat canoe kayak
        ferry ambulance jeep""".split(),
    "furniture": """chair table couch sofa bed bench desk stool cabinet dresser bookshelf
        shelf wardrobe nightstand armchair crib ottoman""".split(),
    "appliance": """oven microwave toaster refrigerator fridge stove dishwasher blender
        kettle mixer freezer heater""".split(),
    "electronics": """laptop computer keyboard mouse monitor television tv phone cellphone
        smartphone tablet camera remote speaker headphones printer projector console""".split(),
    "sports_equipment": """ball bat glove racket racquet ski snowboard skateboard surfboard
        frisbee kite helmet net goal puck club paddle dumbbell""".split(),
    "clothing": """shirt jacket coat dress skirt pants jeans shorts sweater hoodie suit tie
        scarf sock shoe boot sneaker uniform jersey vest gown robe""".split(),
    "accessory": """hat cap glasses sunglasses watch bracelet necklace earring ring belt
        purse handbag wallet backpack luggage suitcase""".split(),
    "utensil": "fork knife spoon spatula whisk ladle tongs chopsticks skewer grater peeler".split(),
    "container": """box bag bottle cup mug bowl plate jar can basket bucket vase pot pan
        tray carton crate barrel jug thermos""".split(),
    "plant": """tree flower grass bush rose tulip daisy sunflower palm pine oak fern cactus
        vine weed moss shrub hedge ivy branch leaf trunk""".split(),
    "structure": """building house tower bridge church castle barn garage shed skyscraper
        cathedral lighthouse windmill stadium fence wall roof door window stairs
        balcony porch chimney gate""".split(),
    "room": "kitchen bathroom bedroom hallway basement attic closet office lobby cellar".split(),
    "place": """street road park beach city town village field forest mountain hill valley
        river lake ocean sea desert island harbor airport station market zoo farm
        garden playground sidewalk highway trail meadow""".split(),
    "tool": """umbrella parasol rope hammer screwdriver wrench drill saw shovel rake broom
        mop ladder scissors pliers axe crowbar flashlight tape chain hook""".split(),
    "toy": "doll teddy lego puzzle balloon yoyo dice domino slide swing seesaw trampoline".split(),
    "instrument": """guitar piano violin drum trumpet flute saxophone cello clarinet harp
        banjo accordion trombone harmonica tuba""".split(),
    "body_part": """head face hand arm leg foot finger thumb ear eye nose mouth hair
        shoulder knee elbow neck chest wrist ankle beak paw tail wing hoof mane
        whiskers""".split(),
    "bathroom_item": """toilet sink bathtub shower towel soap shampoo toothbrush toothpaste
        razor mirror faucet drain sponge""".split(),
    "office_item": """book pen pencil notebook folder stapler envelope letter card magazine
        newspaper calendar clipboard marker crayon eraser binder document""".split(),
    "weather": """rain snow cloud sun wind storm fog mist rainbow lightning thunder hail
        sunshine breeze frost""".split(),
    # ------- added groups (sizes pinned: 32, 28, 50, 12, 15, 11, 14) -------
    "material": """metal plastic wooden wood glass steel iron leather cotton wool silk denim
        ceramic porcelain marble granite concrete brick stone clay rubber paper
        cardboard bamboo copper brass bronze aluminum velvet linen chrome canvas""".split(),
    "color": """black white brown red blue green yellow orange purple pink gray grey beige
        tan maroon navy teal turquoise magenta violet gold silver cream crimson
        scarlet indigo olive lavender""".split(),
    "direction": """front back middle bottom top left right center side corner edge end rear
        north south east west northeast northwest southeast southwest above below
        beneath underneath inside outside interior exterior upper lower upward
        downward forward backward sideways foreground background overhead underside
        midpoint far near close distance horizon upstairs downstairs ahead behind""".split(),
    "vehicle_part": """hood wheel tire windshield bumper headlight taillight fender dashboard
        exhaust axle handlebar""".split(),
    "shape": """round square octagon circle triangle rectangle oval hexagon pentagon cube
        sphere cylinder cone pyramid diamond""".split(),
    "event": """christmas birthday wedding parade festival halloween easter thanksgiving
        graduation carnival ceremony""".split(),
    "number": "one five hundreds two three four six seven eight nine ten dozen twenty thousands".split(),
}

ADDED_GROUP_SIZES = {
    "material": 32,
    "color": 28,
    "direction": 50,
    "vehicle_part": 12,
    "shape": 15,
    "event": 11,
    "number": 14,
}

# Groups whose lemmas are concrete nouns and belong in the noun lexicon.
NOUN_GROUPS = [
    "person", "animal", "food", "drink", "vehicle", "furniture", "appliance",
    "electronics", "sports_equipment", "clothing", "accessory", "utensil",
    "container", "plant", "structure", "room", "place", "tool", "toy",
    "instrument", "body_part", "bathroom_item", "office_item", "weather",
    "vehicle_part", "event",
]

# Position/part nouns from the direction group that do read as nouns in captions.
DIRECTION_NOUNS = """front back middle bottom top center side corner edge end rear inside
    outside foreground background horizon distance""".split()

# Caption-frequent nouns outside any concept group; includes the stop nouns,
# which must be *in* the lexicon for the stop-list exclusion to mean anything.
EXTRA_NOUNS = """row line herd flock pile stack group bunch number picture photo photograph
    image view scene lot couple pair kind type day night time morning evening afternoon
    sky ground floor ceiling meal dinner lunch breakfast snack dessert fruit vegetable
    meat clock sign light lamp candle fire smoke shadow reflection pole post wire track
    platform statue fountain pond pool puddle wave sand rock dirt mud path lane curb
    ramp railing banner flag stroller cart wagon sled stall cage""".split()

IRREGULAR_PLURALS = {
    "man": "men", "woman": "women", "child": "children", "person": "people",
    "foot": "feet", "tooth": "teeth", "mouse": "mice", "goose": "geese",
    "sheep": "sheep", "deer": "deer", "fish": "fish", "knife": "knives",
    "leaf": "leaves", "wolf": "wolves", "shelf": "shelves", "loaf": "loaves",
    "scarf": "scarves", "dice": "dice", "tongs": "tongs", "chopsticks": "chopsticks",
    "glasses": "glasses", "sunglasses": "sunglasses", "pants": "pants",
    "jeans": "jeans", "shorts": "shorts", "headphones": "headphones",
    "whiskers": "whiskers", "stairs": "stairs", "scissors": "scissors",
    "pliers": "pliers",
}

EXTRA_VOCAB = """small large big little tall short long wide narrow tiny huge giant old young
    new ancient modern bright dark shiny dull clean dirty wet dry hot cold warm cool fresh
    stale empty full open closed broken fixed fast slow quick quiet loud busy calm happy sad
    angry tired sleepy hungry thirsty soft hard smooth rough heavy beautiful ugly pretty
    plain fancy simple strange normal weird common rare cheap expensive free tight loose
    thick thin deep shallow high low early late first last next previous single double
    several many few all some none every each other another same different various certain
    walk walks walking walked run runs running ran jump jumps jumping jumped sit sits
    sitting sat stand stands standing stood hold holds holding held ride rides riding rode
    eat eats eating ate drink drinks drinking drank play plays playing played look looks
    looking looked watch watches watching watched carry carries carrying carried throw
    throws throwing threw catch catches catching caught fly flies flying flew swim swims
    swimming swam climb climbs climbing climbed sleep sleeps sleeping slept smile smiles
    smiling smiled wave waves waving waved point points pointing pointed lean leans leaning
    leaned rest rests resting rested wait waits waiting waited cross crosses crossing
    crossed travel travels traveling traveled race races racing raced chase chases chasing
    chased feed feeds feeding fed wear wears wearing wore cut cuts cutting cook cooks
    cooking cooked bake bakes baking baked serve serves serving served pour pours pouring
    poured slice slices slicing sliced grab grabs grabbing grabbed push pushes pushing
    pushed pull pulls pulling pulled lift lifts lifting lifted drop drops dropping dropped
    place places placing placed parked parking park paddle surfing skiing snowboarding
    skating boarding grazing flying standing gathered covered filled topped stacked loaded
    decorated painted colored striped spotted checkered faded torn worn polished rusted
    quickly slowly carefully gently loudly quietly happily sadly together apart nearby
    elsewhere somewhere anywhere everywhere almost nearly very quite rather really truly
    about around through across between among along toward against within without beside
    underneath throughout during before after while because although unless until since
    wartime seaside hillside roadside lakeside bakery brewery gallery library museum
    factory workshop studio office suite condo apartment cottage cabin tent igloo yurt
    motel hotel hostel inn diner cafe restaurant bistro pub tavern saloon bakery
    war peace love hate joy fear hope luck fate idea dream plan goal task job work rest
    game match contest race trip tour visit stay move step turn twist bend fold wrap""".split()


def plural(word: str) -> str | None:
    if word in IRREGULAR_PLURALS:
        p = IRREGULAR_PLURALS[word]
        return None if p == word else p
    if re.search(r"(s|x|z|ch|sh)$", word):
        return word + "es"
    if re.search(r"[bcdfghjklmnpqrstvwxz]y$", word):
        return word[:-1] + "ies"
    return word + "s"


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)

    seen: dict[str, str] = {}
    for group, lemmas in GROUPS.items():
        for lemma in lemmas:
            lemma = lemma.lower()
            if lemma in seen:
                raise SystemExit(f"lemma {lemma!r} in both {seen[lemma]} and {group}")
            seen[lemma] = group
    for group, size in ADDED_GROUP_SIZES.items():
        if len(GROUPS[group]) != size:
            raise SystemExit(f"group {group} has {len(GROUPS[group])} lemmas, want {size}")

    lines = ["# concept groups: group_id<TAB>lemma"]
    for group in GROUPS:
        for lemma in GROUPS[group]:
            lines.append(f"{group}\t{lemma.lower()}")
    (DATA_DIR / "concept_groups.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    nouns: set[str] = set()
    for group in NOUN_GROUPS:
        nouns.update(GROUPS[group])
    nouns.update(DIRECTION_NOUNS)
    nouns.update(EXTRA_NOUNS)
    for word in sorted(nouns):
        p = plural(word)
        if p:
            nouns.add(p)
    (DATA_DIR / "nouns.txt").write_text("\n".join(sorted(nouns)) + "\n", encoding="utf-8")

    stop = "row group bunch number picture photo image view scene side lot couple pair kind type".split()
    stop_all = sorted(set(stop) | {p for w in stop if (p := plural(w))})
    (DATA_DIR / "stop_nouns.txt").write_text("\n".join(stop_all) + "\n", encoding="utf-8")

    synonyms = [
        ("umbrella", "parasol"), ("couch", "sofa"), ("cup", "mug"),
        ("bike", "bicycle"), ("tv", "television"), ("plane", "airplane"),
        ("phone", "cellphone"), ("cellphone", "smartphone"), ("racket", "racquet"),
        ("fridge", "refrigerator"), ("gray", "grey"), ("purse", "handbag"),
        ("photo", "photograph"), ("rock", "stone"), ("street", "road"),
    ]
    syn_lines = ["# synonym pairs: word<TAB>word (symmetric)"]
    syn_lines += [f"{a}\t{b}" for a, b in synonyms]
    (DATA_DIR / "synonyms.tsv").write_text("\n".join(syn_lines) + "\n", encoding="utf-8")

    danger = "gun guns weapon weapons knife knives bomb bombs rifle pistol grenade explosive".split()
    (DATA_DIR / "danger_words.txt").write_text("\n".join(danger) + "\n", encoding="utf-8")

    vocab: set[str] = set()
    vocab.update(w for w in seen if re.fullmatch(r"[a-z]+", w))
    vocab.update(w for w in nouns if re.fullmatch(r"[a-z]+", w))
    vocab.update(w for w in EXTRA_VOCAB if re.fullmatch(r"[a-z]+", w))
    (DATA_DIR / "vocab.txt").write_text("\n".join(sorted(vocab)) + "\n", encoding="utf-8")

    print(f"groups: {len(GROUPS)}  lemmas: {len(seen)}  nouns: {len(nouns)}  vocab: {len(vocab)}")


if __name__ == "__main__":
    main()
