from scenekit.dsl import compile_script, format_script

MESSY = (
    "# scenario with sloppy layout\n"
    "terminate   when time above 20.0\n"
    "require collision of rear-end\n"
    "param gap=Range(20.0,35.0)\n"
    "behavior Cruise( v ): follow lane at v\n"
    "ego = new Car on lane main_a at 15.0 with behavior Cruise(12.0)   # tail comment\n"
    "lead = new Car ahead of ego by gap\n"
)

CANONICAL = (
    "param gap = Range(20.0, 35.0)\n"
    "\n"
    "behavior Cruise(v):\n"
    "    follow lane at v\n"
    "\n"
    "ego = new Car on lane main_a at 15.0 with behavior Cruise(12.0)\n"
    "lead = new Car ahead of ego by gap\n"
    "\n"
    "require collision of rear-end\n"
    "\n"
    "terminate when time above 20.0\n"
)


def compile_ok(text):
    ast, diags = compile_script(text)
    assert ast is not None, diags
    return ast


def test_canonical_layout_frozen():
    assert format_script(compile_ok(MESSY)) == CANONICAL


def test_round_trip_preserves_structure():
    ast = compile_ok(MESSY)
    assert compile_ok(format_script(ast)) == ast


def test_idempotent():
    once = format_script(compile_ok(MESSY))
    assert format_script(compile_ok(once)) == once


def test_equivalent_layouts_format_identically():
    spread = MESSY.replace("param gap=Range(20.0,35.0)", "param   gap =  Range( 20.0 , 35.0 )")
    assert format_script(compile_ok(spread)) == format_script(compile_ok(MESSY))


def test_all_surface_forms_round_trip():
    text = (
        "param a = 5.0\n"
        "param b = Choice[1.0, 2.5, -3.0]\n"
        "behavior Dart(v):\n"
        "    cross left at v when distance to ego below 12.0\n"
        "behavior Merge(r): cut in right at r when time above 2.0\n"
        "behavior Wait(): idle\n"
        "behavior Halt(): stop\n"
        "behavior Slow(rate): brake at rate when distance from walker to ego below 9.0\n"
        "ego = new Truck at (0.0, -2.5) facing 45.0 with speed 8.0\n"
        "walker = new Pedestrian left of ego by 3.0 with behavior Dart(1.5)\n"
        "rider = new Bicycle right of ego by b with behavior Merge(1.0)\n"
        "parked = new Car behind ego by a with dims (4.2, 1.9) with behavior Wait()\n"
        "lead = new Car ahead of ego by 20.0 with behavior Halt()\n"
        "guard = new Truck on lane main_b at 40.0 with behavior Slow(3.0)\n"
        "require collision\n"
        "require ego speed above 2.0 at collision\n"
        "terminate when distance from walker to ego below 1.0\n"
    )
    ast = compile_ok(text)
    formatted = format_script(ast)
    assert compile_ok(formatted) == ast
    assert format_script(compile_ok(formatted)) == formatted


def test_numbers_survive_round_trip_exactly():
    text = "param tiny = Choice[1e-06, 2.5e-07, 1000000.0]\nego = new Car at (0.125, -7.875)\nterminate when time above tiny\n"
    ast = compile_ok(text)
    assert compile_ok(format_script(ast)) == ast
