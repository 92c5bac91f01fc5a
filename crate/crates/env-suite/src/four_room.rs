//! Gated four-room gridworlds with one-way doors between rooms.
//!
//! The grid is split by a wall row and a wall column into rooms A (top
//! left), B (top right), C (bottom left), and D (bottom right). Four door
//! cells are carved out of the walls, arranged in a cycle A→B→D→C→A so every
//! room reaches every other when all gates are open. Each door is entered
//! only from its own room (one-way); taking the door's direction at the door
//! cell either lands on a fixed cell of the next room (gate open) or stays
//! put (gate closed). Those four `(door, direction)` pairs — plus the dummy
//! start pair when per-task start cells are used — are exactly the pairs
//! whose dynamics vary across tasks.

use mdp_core::TabularMDP;

use crate::error::EnvError;
use crate::family::TaskFamily;
use crate::hierarchy::LatentHierarchy;

/// Movement actions. Bumping into a wall, the grid edge, or a door cell from
/// anywhere but its approach cell leaves the agent in place.
pub const ACTION_UP: usize = 0;
pub const ACTION_DOWN: usize = 1;
pub const ACTION_LEFT: usize = 2;
pub const ACTION_RIGHT: usize = 3;
pub const NUM_ACTIONS: usize = 4;

/// The four rooms, in cluster order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Room {
    A,
    B,
    C,
    D,
}

const ROOMS: [Room; 4] = [Room::A, Room::B, Room::C, Room::D];

/// One one-way door: carved wall cell, the direction that crosses it, the
/// single room cell it is entered from, and the fixed landing cell beyond.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Door {
    pub cell: (usize, usize),
    pub direction: usize,
    pub approach: (usize, usize),
    pub landing: (usize, usize),
    /// Room whose cluster the door cell belongs to (the room it is entered
    /// from).
    pub room: Room,
}

/// One task of a gated four-room family.
///
/// `gates_open` follows the cycle order `[A→B, B→D, D→C, C→A]`. With
/// `dummy_start`, a dedicated start state is appended whose action 0 jumps to
/// `start_cell` (and whose other actions self-loop), letting tasks start in
/// different rooms; without it all tasks must share `start_cell`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourRoomSpec {
    pub side: usize,
    pub horizon: usize,
    pub slip: f64,
    pub dummy_start: bool,
    pub gates_open: [bool; 4],
    pub start_cell: (usize, usize),
    pub goal_cell: (usize, usize),
}

/// Shared cell/state layout of a four-room grid.
#[derive(Debug, Clone)]
pub struct FourRoomGeometry {
    side: usize,
    wall: usize,
    dummy_start: bool,
    doors: [Door; 4],
    /// `state_of[r * side + c]`, `usize::MAX` for wall cells.
    state_of: Vec<usize>,
    /// Inverse map for grid states (excludes the dummy state).
    cell_of: Vec<(usize, usize)>,
}

impl FourRoomGeometry {
    /// # Errors
    /// Rejects `side < 3`.
    pub fn new(side: usize, dummy_start: bool) -> Result<Self, EnvError> {
        if side < 3 {
            return Err(EnvError::BadParameter(format!("four-room side must be at least 3, got {side}")));
        }
        let wall = side / 2;
        let mid_lo = wall / 2;
        let mid_hi = wall + 1 + (side - wall - 1) / 2;
        let doors = [
            Door {
                cell: (mid_lo, wall),
                direction: ACTION_RIGHT,
                approach: (mid_lo, wall - 1),
                landing: (mid_lo, wall + 1),
                room: Room::A,
            },
            Door {
                cell: (wall, mid_hi),
                direction: ACTION_DOWN,
                approach: (wall - 1, mid_hi),
                landing: (wall + 1, mid_hi),
                room: Room::B,
            },
            Door {
                cell: (mid_hi, wall),
                direction: ACTION_LEFT,
                approach: (mid_hi, wall + 1),
                landing: (mid_hi, wall - 1),
                room: Room::D,
            },
            Door {
                cell: (wall, mid_lo),
                direction: ACTION_UP,
                approach: (wall + 1, mid_lo),
                landing: (wall - 1, mid_lo),
                room: Room::C,
            },
        ];
        let mut state_of = vec![usize::MAX; side * side];
        let mut cell_of = Vec::new();
        for r in 0..side {
            for c in 0..side {
                let on_wall = r == wall || c == wall;
                let is_door = doors.iter().any(|d| d.cell == (r, c));
                if !on_wall || is_door {
                    state_of[r * side + c] = cell_of.len();
                    cell_of.push((r, c));
                }
            }
        }
        Ok(Self { side, wall, dummy_start, doors, state_of, cell_of })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn doors(&self) -> &[Door; 4] {
        &self.doors
    }

    pub fn has_dummy_start(&self) -> bool {
        self.dummy_start
    }

    /// Grid cells that are states (room cells and door cells).
    pub fn num_grid_states(&self) -> usize {
        self.cell_of.len()
    }

    /// Total states including the dummy start state if present.
    pub fn num_states(&self) -> usize {
        self.num_grid_states() + usize::from(self.dummy_start)
    }

    /// Index of the dummy start state (always the last state).
    ///
    /// # Panics
    /// Panics if the geometry has no dummy start.
    pub fn dummy_state(&self) -> usize {
        assert!(self.dummy_start, "geometry has no dummy start state");
        self.num_grid_states()
    }

    /// State index of a grid cell, if the cell is a state.
    pub fn state_of(&self, cell: (usize, usize)) -> Option<usize> {
        if cell.0 >= self.side || cell.1 >= self.side {
            return None;
        }
        match self.state_of[cell.0 * self.side + cell.1] {
            usize::MAX => None,
            s => Some(s),
        }
    }

    /// Grid cell of a grid state (not defined for the dummy state).
    pub fn cell_of(&self, state: usize) -> (usize, usize) {
        self.cell_of[state]
    }

    /// Room containing a cell, if it is a room cell (doors excluded).
    pub fn room_of(&self, cell: (usize, usize)) -> Option<Room> {
        let (r, c) = cell;
        if r >= self.side || c >= self.side || r == self.wall || c == self.wall {
            return None;
        }
        Some(match (r < self.wall, c < self.wall) {
            (true, true) => Room::A,
            (true, false) => Room::B,
            (false, true) => Room::C,
            (false, false) => Room::D,
        })
    }

    fn door_at(&self, cell: (usize, usize)) -> Option<&Door> {
        self.doors.iter().find(|d| d.cell == cell)
    }

    /// Where a single intended move resolves to, before slip: the neighbor if
    /// it is a room cell of the same room or a door entered via its approach,
    /// the landing rule at door cells, or the current cell (bump) otherwise.
    /// Door-direction moves at door cells are exits and are handled by the
    /// caller, not here.
    fn resolve_move(&self, cell: (usize, usize), action: usize) -> (usize, usize) {
        let (r, c) = cell;
        let target = match action {
            ACTION_UP if r > 0 => (r - 1, c),
            ACTION_DOWN if r + 1 < self.side => (r + 1, c),
            ACTION_LEFT if c > 0 => (r, c - 1),
            ACTION_RIGHT if c + 1 < self.side => (r, c + 1),
            _ => return cell,
        };
        if let Some(door) = self.door_at(target) {
            // A door is entered only from its own room along its direction.
            return if door.approach == cell && door.direction == action { target } else { cell };
        }
        if self.room_of(target).is_some() {
            // Rooms are wall-separated, so an in-grid room neighbor of a room
            // cell is always in the same room.
            target
        } else {
            cell
        }
    }
}

/// The two directions perpendicular to `action`, used for slip.
fn lateral(action: usize) -> [usize; 2] {
    match action {
        ACTION_UP | ACTION_DOWN => [ACTION_LEFT, ACTION_RIGHT],
        _ => [ACTION_UP, ACTION_DOWN],
    }
}

fn check_shared_geometry(specs: &[FourRoomSpec]) -> Result<(), EnvError> {
    let first = specs[0];
    for (t, spec) in specs.iter().enumerate() {
        if spec.side != first.side
            || spec.horizon != first.horizon
            || spec.slip != first.slip
            || spec.dummy_start != first.dummy_start
        {
            return Err(EnvError::GeometryMismatch(format!(
                "task {t} differs from task 0 in side/horizon/slip/dummy_start"
            )));
        }
        if !spec.dummy_start && spec.start_cell != first.start_cell {
            return Err(EnvError::GeometryMismatch(format!(
                "task {t} has start cell {:?} but task 0 has {:?}; per-task starts require dummy_start",
                spec.start_cell, first.start_cell
            )));
        }
    }
    if !(0.0..0.5).contains(&first.slip) {
        return Err(EnvError::BadParameter(format!("slip must lie in [0, 0.5), got {}", first.slip)));
    }
    if first.horizon == 0 {
        return Err(EnvError::BadParameter("horizon must be positive".to_string()));
    }
    Ok(())
}

/// Builds one task's transition table over the shared geometry.
fn build_task(geom: &FourRoomGeometry, spec: &FourRoomSpec) -> Result<TabularMDP, EnvError> {
    let n = geom.num_states();
    let start_state = geom
        .state_of(spec.start_cell)
        .filter(|_| geom.room_of(spec.start_cell).is_some())
        .ok_or_else(|| EnvError::BadParameter(format!("start cell {:?} is not a room cell", spec.start_cell)))?;
    let goal_state = geom
        .state_of(spec.goal_cell)
        .filter(|_| geom.room_of(spec.goal_cell).is_some())
        .ok_or_else(|| EnvError::BadParameter(format!("goal cell {:?} is not a room cell", spec.goal_cell)))?;

    let mut rows = vec![0.0; n * NUM_ACTIONS * n];
    let mut add = |s: usize, a: usize, s_next: usize, p: f64| {
        rows[(s * NUM_ACTIONS + a) * n + s_next] += p;
    };

    for state in 0..geom.num_grid_states() {
        let cell = geom.cell_of(state);
        if let Some(door) = geom.door_at(cell) {
            let gate_index = geom.doors.iter().position(|d| d.cell == cell).expect("door located");
            for a in 0..NUM_ACTIONS {
                if a == door.direction {
                    // The gate: open lands beyond the wall, closed bumps.
                    let dest = if spec.gates_open[gate_index] {
                        geom.state_of(door.landing).expect("landing is a state")
                    } else {
                        state
                    };
                    add(state, a, dest, 1.0);
                } else {
                    let dest = if a == opposite(door.direction) {
                        geom.state_of(door.approach).expect("approach is a state")
                    } else {
                        state
                    };
                    add(state, a, dest, 1.0);
                }
            }
            continue;
        }
        // Room cell: intended move with probability 1 − 2·slip, lateral slips
        // confined to room cells (anything else keeps the agent in place).
        for a in 0..NUM_ACTIONS {
            let intended = geom.state_of(geom.resolve_move(cell, a)).expect("resolved cell is a state");
            if spec.slip == 0.0 {
                add(state, a, intended, 1.0);
                continue;
            }
            add(state, a, intended, 1.0 - 2.0 * spec.slip);
            for lat in lateral(a) {
                let slipped = geom.resolve_move(cell, lat);
                let dest = if geom.room_of(slipped).is_some() { slipped } else { cell };
                add(state, a, geom.state_of(dest).expect("slip target is a state"), spec.slip);
            }
        }
    }

    let mut rewards = vec![0.0; n * NUM_ACTIONS];
    for a in 0..NUM_ACTIONS {
        rewards[goal_state * NUM_ACTIONS + a] = 1.0;
    }

    let start = if geom.dummy_start {
        let dummy = geom.dummy_state();
        for a in 0..NUM_ACTIONS {
            let dest = if a == 0 { start_state } else { dummy };
            add(dummy, a, dest, 1.0);
        }
        dummy
    } else {
        start_state
    };
    Ok(TabularMDP::new(n, NUM_ACTIONS, spec.horizon, start, rewards, rows)?)
}

fn opposite(action: usize) -> usize {
    match action {
        ACTION_UP => ACTION_DOWN,
        ACTION_DOWN => ACTION_UP,
        ACTION_LEFT => ACTION_RIGHT,
        _ => ACTION_LEFT,
    }
}

/// Ground-truth hierarchy: one cluster per room (door cells belong to the
/// room they are entered from), plus a singleton cluster for the dummy start
/// state. Entrances are gate landings, the door cells themselves (a closed
/// gate's row is supported on the door cell), per-task start cells, and the
/// dummy state.
fn build_hierarchy(geom: &FourRoomGeometry, specs: &[FourRoomSpec]) -> Result<LatentHierarchy, EnvError> {
    let num_clusters = 4 + usize::from(geom.dummy_start);
    let mut clusters = vec![Vec::new(); num_clusters];
    let mut entrances = vec![Vec::new(); num_clusters];
    let mut exits = vec![Vec::new(); num_clusters];
    let room_index = |room: Room| ROOMS.iter().position(|&r| r == room).expect("room listed");

    for state in 0..geom.num_grid_states() {
        let cell = geom.cell_of(state);
        let c = match geom.room_of(cell) {
            Some(room) => room_index(room),
            None => room_index(geom.door_at(cell).expect("non-room state is a door").room),
        };
        clusters[c].push(state);
    }
    for door in geom.doors() {
        let c = room_index(door.room);
        let door_state = geom.state_of(door.cell).expect("door is a state");
        exits[c].push((door_state, door.direction));
        // Closed-gate rows are supported on the door cell itself, so the
        // door cell must be an entrance of its own cluster.
        entrances[c].push(door_state);
        let landing_room = geom.room_of(door.landing).expect("landing is a room cell");
        entrances[room_index(landing_room)].push(geom.state_of(door.landing).expect("landing is a state"));
    }
    for spec in specs {
        let room = geom.room_of(spec.start_cell).expect("start is a room cell");
        entrances[room_index(room)].push(geom.state_of(spec.start_cell).expect("start is a state"));
    }
    if geom.dummy_start {
        let dummy = geom.dummy_state();
        clusters[4].push(dummy);
        entrances[4].push(dummy);
        exits[4].push((dummy, 0));
    }
    LatentHierarchy::new(geom.num_states(), NUM_ACTIONS, clusters, entrances, exits)
}

/// Builds the task family for a list of per-task specs sharing one geometry.
///
/// # Errors
/// Rejects geometry disagreements, start/goal cells that are not room cells,
/// and gates (or the dummy start pair) whose dynamics are identical in every
/// task — such a pair cannot be an exit, since exits must vary.
pub fn make_four_room_family(specs: &[FourRoomSpec]) -> Result<TaskFamily, EnvError> {
    if specs.is_empty() {
        return Err(EnvError::BadFamily("no four-room specs".to_string()));
    }
    check_shared_geometry(specs)?;
    let geom = FourRoomGeometry::new(specs[0].side, specs[0].dummy_start)?;
    for (gate_index, door) in geom.doors().iter().enumerate() {
        let first = specs[0].gates_open[gate_index];
        if specs.iter().all(|s| s.gates_open[gate_index] == first) {
            let state = geom.state_of(door.cell).expect("door is a state");
            return Err(EnvError::ExitNeverVaries { state, action: door.direction });
        }
    }
    if geom.has_dummy_start() && specs.iter().all(|s| s.start_cell == specs[0].start_cell) {
        return Err(EnvError::ExitNeverVaries { state: geom.dummy_state(), action: 0 });
    }
    let tasks = specs.iter().map(|spec| build_task(&geom, spec)).collect::<Result<Vec<_>, _>>()?;
    let hierarchy = build_hierarchy(&geom, specs)?;
    // Exits are deterministic point masses here, so any two differing exit
    // rows are at total variation distance exactly 1.
    TaskFamily::new(tasks, hierarchy, 1.0)
}

/// The standard 6-task benchmark family on an `8×8` grid with a dummy start:
/// one all-open task per traversal showcase and one task per closed gate,
/// so every gate toggles and every closed gate is worth imagining open.
///
/// Task list (gate order `[A→B, B→D, D→C, C→A]`):
/// 1. all open, start A, goal D; 2. `A→B` closed, start A, goal B;
/// 3. `B→D` closed, start B, goal D; 4. `D→C` closed, start D, goal C;
/// 5. `C→A` closed, start C, goal A; 6. all open, start D, goal B.
pub fn benchmark_four_room_specs(horizon: usize) -> Vec<FourRoomSpec> {
    let side = 8;
    let corner = |room: Room| match room {
        Room::A => (0, 0),
        Room::B => (0, side - 1),
        Room::C => (side - 1, 0),
        Room::D => (side - 1, side - 1),
    };
    let base = FourRoomSpec {
        side,
        horizon,
        slip: 0.0,
        dummy_start: true,
        gates_open: [true; 4],
        start_cell: corner(Room::A),
        goal_cell: corner(Room::D),
    };
    let task = |gates_open: [bool; 4], start: Room, goal: Room| FourRoomSpec {
        gates_open,
        start_cell: corner(start),
        goal_cell: corner(goal),
        ..base
    };
    vec![
        task([true, true, true, true], Room::A, Room::D),
        task([false, true, true, true], Room::A, Room::B),
        task([true, false, true, true], Room::B, Room::D),
        task([true, true, false, true], Room::D, Room::C),
        task([true, true, true, false], Room::C, Room::A),
        task([true, true, true, true], Room::D, Room::B),
    ]
}
