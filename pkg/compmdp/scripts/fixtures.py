"""
Fixture seeding script for example documents
"""
import sys
from pathlib import Path

from compmdp.io.documents import serialize_bridge, serialize_group, serialize_mdp, serialize_morphism
from compmdp.services.morphism import morphism_service
from compmdp.services.worlds import worlds_service
from compmdp.services.zigzag import zigzag_service

DEFAULT_TARGET = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "seeded"


def seed_fixtures(target: Path = DEFAULT_TARGET) -> None:
    """Write the example worlds as documents plus expressions that rebuild them"""
    print(f"Seeding fixtures into {target}...")
    target.mkdir(parents=True, exist_ok=True)

    def write(name: str, text: str) -> None:
        (target / name).write_text(text, encoding="utf-8")
        print(f"  wrote {name}")

    # Obstacle course grid and its obstacle-free part
    layout = worlds_service.course_layout()
    grid = worlds_service.grid_from_layout(layout)
    safe, inclusion = worlds_service.safe_grid(layout)
    write("course_grid.json", serialize_mdp(grid))
    write("course_safe.json", serialize_mdp(safe))
    write("safe_into_grid.json", serialize_morphism(inclusion))

    # Sequential regions as a zig-zag of environments and point bridges
    z = worlds_service.sequential_regions(layout, [(3, 3), (0, 0), (0, 3)])
    for i, env in enumerate(z.environments):
        write(f"region_env{i}.json", serialize_mdp(env))
    for i, bridge in enumerate(z.bridges):
        write(f"region_bridge{i}.json", serialize_bridge(bridge))
    chain = " ".join(
        f"region_env{i} -[region_bridge{i}]-" for i in range(z.n)
    )
    write("regions.expr", f"zigzag({chain} region_env{z.n})\n")
    write("regions_composite.json", serialize_mdp(zigzag_service.build_composite(z).mdp))

    # Mirror symmetry of a grid with symmetric goals
    mirror_layout = layout.model_copy(update={"obstacles": [(1, 1), (1, 2)], "goals": [(0, 0), (0, 3)]})
    mirror_grid, _ = worlds_service.safe_grid(mirror_layout)
    group = worlds_service.mirror_group(mirror_grid, mirror_layout)
    write("mirror_grid.json", serialize_mdp(mirror_grid))
    write("mirror_group.json", serialize_group(group.generators))
    write("mirror.expr", "quotient(mirror_grid by mirror_group)\n")

    # Identity of the safe grid, for gluing it to itself
    write("safe_identity.json", serialize_morphism(morphism_service.identity(safe)))
    write("self_glue.expr", "glue(course_safe, course_safe along course_safe via safe_identity, safe_identity)\n")

    print("Fixture seeding completed successfully!")


if __name__ == "__main__":
    seed_fixtures(Path(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT_TARGET)
