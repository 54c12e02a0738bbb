"""Block vocabulary used by the simulator, the DSL and the checkers."""
from __future__ import annotations

from dataclasses import dataclass

FACINGS = ("north", "south", "east", "west")
DEFAULT_FACING = "north"
SCAFFOLD_BLOCK = "dirt"


@dataclass(frozen=True)
class BlockDef:
    id: str
    solid: bool = True
    orientable: bool = False
    power_source: bool = False
    lamp: bool = False
    scaffold: bool = False
    # placed in the late phase together with orientable blocks
    furniture: bool = False


class UnknownBlockError(KeyError):
    def __init__(self, block_id: str):
        super().__init__(block_id)
        self.block_id = block_id

    def __str__(self) -> str:
        return f"unknown block id {self.block_id!r}"


def _defs() -> list[BlockDef]:
    plain = [
        "stone", "cobblestone", "stone_bricks", "mossy_stone_bricks", "bricks",
        "oak_planks", "spruce_planks", "birch_planks", "dark_oak_planks",
        "oak_log", "spruce_log", "birch_log", "sandstone", "sand", "gravel",
        "grass_block", "glass", "glass_pane", "white_wool", "red_wool",
        "oak_leaves", "oak_fence", "cobblestone_wall", "brick_wall",
        "snow_block", "powder_snow", "ice", "packed_ice", "blue_ice",
        "quartz_block", "terracotta", "white_concrete", "oak_slab",
        "stone_slab", "brick_slab",
    ]
    defs = [BlockDef(b) for b in plain]
    defs += [
        BlockDef("air", solid=False),
        BlockDef(SCAFFOLD_BLOCK, scaffold=True),
        BlockDef("scaffolding", scaffold=True),
        BlockDef("redstone_lamp", lamp=True),
        BlockDef("daylight_detector", power_source=True),
        BlockDef("crafting_table", furniture=True),
        BlockDef("bookshelf", furniture=True),
        BlockDef("campfire", solid=False, furniture=True),
        BlockDef("torch", solid=False, furniture=True),
        BlockDef("lantern", solid=False, furniture=True),
        BlockDef("snow", solid=False),
    ]
    for door in ("oak_door", "spruce_door", "birch_door", "iron_door"):
        defs.append(BlockDef(door, solid=False, orientable=True, furniture=True))
    for colour in ("red", "white", "blue", "yellow", "green"):
        defs.append(BlockDef(f"{colour}_bed", orientable=True, furniture=True))
    for name in ("chest", "furnace", "ladder", "oak_stairs", "stone_brick_stairs",
                 "brick_stairs", "cobblestone_stairs", "spruce_stairs"):
        defs.append(BlockDef(name, solid=name != "ladder", orientable=True, furniture=True))
    for flower in ("poppy", "dandelion", "blue_orchid", "allium", "azure_bluet",
                   "oxeye_daisy", "cornflower", "lily_of_the_valley", "red_tulip"):
        defs.append(BlockDef(flower, solid=False, furniture=True))
    return defs


REGISTRY: dict[str, BlockDef] = {d.id: d for d in _defs()}

# `bed` is accepted as shorthand for the red bed
ALIASES = {"bed": "red_bed", "door": "oak_door", "lamp": "redstone_lamp"}


def resolve(block_id: str) -> str:
    """Canonical id for ``block_id`` (aliases and an optional ``minecraft:`` prefix)."""
    name = block_id.strip().lower()
    if name.startswith("minecraft:"):
        name = name[len("minecraft:"):]
    name = ALIASES.get(name, name)
    if name not in REGISTRY:
        raise UnknownBlockError(block_id)
    return name


def get(block_id: str) -> BlockDef:
    try:
        return REGISTRY[block_id]
    except KeyError:
        raise UnknownBlockError(block_id) from None


def is_known(block_id: str) -> bool:
    return block_id in REGISTRY


# families used by the structural checkers
SNOW_FAMILY = frozenset({"snow_block", "snow", "powder_snow"})
ICE_FAMILY = frozenset({"ice", "packed_ice", "blue_ice"})
FLOWER_FAMILY = frozenset({
    "poppy", "dandelion", "blue_orchid", "allium", "azure_bluet",
    "oxeye_daisy", "cornflower", "lily_of_the_valley", "red_tulip",
})
CHIMNEY_FAMILY = frozenset({"bricks", "brick_wall", "brick_slab", "brick_stairs", "campfire"})
GARDEN_FAMILY = frozenset({"grass_block", "oak_leaves", "oak_fence"}) | FLOWER_FAMILY


def is_door(block_id: str) -> bool:
    return block_id.endswith("_door")


def is_bed(block_id: str) -> bool:
    return block_id.endswith("_bed")


def is_window(block_id: str) -> bool:
    return block_id in ("glass", "glass_pane") or block_id.endswith("_glass") or block_id.endswith("_glass_pane")
