//! Low-level event emission for one simulated trace.
//!
//! Controllable actions are spaced by one sampled inter-event delay each;
//! the first action after a system reaction waits a longer think pause.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::event_model::keycodes::{BACKSPACE, MOUSE_LEFT, MOUSE_RIGHT, NUM, TEXT};
use crate::event_model::{Cell, EventKey, LowLevelEvent};

use super::SimulationParams;

/// Median inter-event delay for a reactivity in `[0, 1]`.
pub fn median_delay_ms(reactivity: f64) -> f64 {
    328.0 + (1.0 - reactivity) * 900.0
}

pub const DELAY_SIGMA: f64 = 0.25;
/// Think pause before the first action of a new intra task, in delays.
const THINK_FACTOR: f64 = 2.5;
const KEY_HOLD_MS: u64 = 55;
const CLICK_HOLD_MS: u64 = 70;
/// Same-cell clicks closer than this would read as a double click.
const CLICK_SEPARATION_MS: u64 = 480;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum App {
    Explorer,
    Notepad,
    Calculator,
}

impl App {
    pub fn process(self) -> &'static str {
        match self {
            App::Explorer => "explorer.exe",
            App::Notepad => "notepad.exe",
            App::Calculator => "calculator.exe",
        }
    }
}

/// A window known to the simulated desktop.
#[derive(Debug, Clone)]
pub struct Window {
    pub app: App,
    pub pid: u32,
    pub title: String,
    pub minimized: bool,
}

pub struct Session<'a> {
    pub params: &'a SimulationParams,
    pub rng: ChaCha8Rng,
    pub events: Vec<LowLevelEvent>,
    /// Start time of the most recent controllable action.
    t: u64,
    after_system: bool,
    pub cursor: Cell,
    last_click: Option<(Cell, u64)>,
    delay: LogNormal<f64>,
    /// Open windows, most recently focused last.
    pub windows: Vec<Window>,
    next_pid: u32,
}

impl<'a> Session<'a> {
    pub fn new(params: &'a SimulationParams, rng: ChaCha8Rng) -> Self {
        let median = median_delay_ms(params.reactivity);
        let mut s = Self {
            params,
            rng,
            events: Vec::new(),
            t: 0,
            after_system: true,
            cursor: Cell::new(2, 2),
            last_click: None,
            delay: LogNormal::new(median.ln(), DELAY_SIGMA).expect("valid log-normal"),
            windows: Vec::new(),
            next_pid: 0,
        };
        s.next_pid = s.rng.random_range(1000..9000);
        s
    }

    pub fn draw(&mut self, likelihood: f64) -> bool {
        self.rng.random_bool(likelihood.clamp(0.0, 1.0))
    }

    fn last_ts(&self) -> u64 {
        self.events.last().map_or(0, LowLevelEvent::timestamp_ms)
    }

    fn sample_delay(&mut self) -> u64 {
        self.delay.sample(&mut self.rng).round() as u64
    }

    /// Extra idle time scaled to the user's pace, e.g. for reading.
    pub fn pause(&mut self, delays: f64) {
        let d = self.sample_delay() as f64 * delays;
        self.t += d as u64;
    }

    /// Advances the clock to the start of the next controllable action.
    fn begin(&mut self) -> u64 {
        let gap = if self.after_system {
            (self.sample_delay() as f64 * THINK_FACTOR) as u64
        } else {
            self.sample_delay()
        };
        self.after_system = false;
        self.t = (self.t + gap).max(self.last_ts() + 30);
        self.t
    }

    fn push(&mut self, ts: u64, key: EventKey, params: Vec<String>) {
        let e = LowLevelEvent::new(ts, key, params).expect("simulator emits valid events");
        self.events.push(e);
    }

    // ------------------------------------------------------------------
    // Mouse
    // ------------------------------------------------------------------

    fn step_towards(from: Cell, to: Cell) -> Cell {
        let sx = (to.x as i16 - from.x as i16).signum();
        let sy = (to.y as i16 - from.y as i16).signum();
        Cell::new((from.x as i16 + sx) as u8, (from.y as i16 + sy) as u8)
    }

    /// Cells adjacent to `at` farther from `target` and not yet visited.
    fn detour_options(at: Cell, target: Cell, visited: &[Cell]) -> Vec<Cell> {
        let mut out = Vec::new();
        for dx in -1i16..=1 {
            for dy in -1i16..=1 {
                let x = at.x as i16 + dx;
                let y = at.y as i16 + dy;
                if (dx, dy) == (0, 0) || !(1..=4).contains(&x) || !(1..=4).contains(&y) {
                    continue;
                }
                let c = Cell::new(x as u8, y as u8);
                if c.chebyshev(target) >= at.chebyshev(target) && !visited.contains(&c) {
                    out.push(c);
                }
            }
        }
        out
    }

    /// Moves the cursor along a shortest grid path. With probability
    /// `1 - mouse_precision` the cursor instead travels one axis at a time and
    /// shoots one cell past the target before coming back.
    pub fn move_to(&mut self, target: Cell) {
        if self.cursor == target {
            return;
        }
        // the logger reports the resting position as movement starts
        let start = self.cursor;
        let ts = self.last_ts().max(self.t) + 15;
        self.push(ts, EventKey::M, cell_params(start));
        if self.draw(1.0 - self.params.mouse_precision) {
            let corner = Cell::new(target.x, start.y);
            let mut legs = vec![corner, target];
            match Self::overshoot(start, corner, target) {
                Some(beyond) => legs.push(beyond),
                None => {
                    let options = Self::detour_options(target, target, &[start]);
                    legs.push(options[self.rng.random_range(0..options.len())]);
                }
            }
            for leg in legs {
                while self.cursor != leg {
                    let next = Self::step_towards(self.cursor, leg);
                    self.mouse_step(next);
                }
            }
        }
        while self.cursor != target {
            let next = Self::step_towards(self.cursor, target);
            self.mouse_step(next);
        }
    }

    /// The cell one step past `target` along the final leg of an axis-by-axis
    /// path, falling back to the first leg's direction at the grid border.
    fn overshoot(start: Cell, corner: Cell, target: Cell) -> Option<Cell> {
        let last = (0, (target.y as i16 - corner.y as i16).signum());
        let first = ((corner.x as i16 - start.x as i16).signum(), 0);
        [last, first]
            .into_iter()
            .filter(|&d| d != (0, 0))
            .map(|(dx, dy)| (target.x as i16 + dx, target.y as i16 + dy))
            .find(|(x, y)| (1..=4).contains(x) && (1..=4).contains(y))
            .map(|(x, y)| Cell::new(x as u8, y as u8))
    }

    fn mouse_step(&mut self, c: Cell) {
        let ts = self.begin();
        self.push(ts, EventKey::M, cell_params(c));
        self.cursor = c;
    }

    fn press_release(&mut self, button: u32, double: bool) {
        let mut ts = self.begin();
        if let Some((cell, at)) = self.last_click {
            if cell == self.cursor && ts < at + CLICK_SEPARATION_MS {
                ts = at + CLICK_SEPARATION_MS;
                self.t = ts;
            }
        }
        let c = self.cursor;
        let code = button.to_string();
        let p = |code: &str| vec![code.to_string(), c.x.to_string(), c.y.to_string()];
        self.push(ts, EventKey::K3, p(&code));
        self.push(ts + CLICK_HOLD_MS, EventKey::K4, p(&code));
        let mut end = ts + CLICK_HOLD_MS;
        if double {
            self.push(ts + 150, EventKey::K3, p(&code));
            self.push(ts + 150 + CLICK_HOLD_MS, EventKey::K4, p(&code));
            end = ts + 150 + CLICK_HOLD_MS;
        }
        self.last_click = Some((c, end));
    }

    pub fn click(&mut self, target: Cell) {
        self.move_to(target);
        self.press_release(MOUSE_LEFT, false);
    }

    pub fn right_click(&mut self, target: Cell) {
        self.move_to(target);
        self.press_release(MOUSE_RIGHT, false);
    }

    pub fn double_click(&mut self, target: Cell) {
        self.move_to(target);
        self.press_release(MOUSE_LEFT, true);
    }

    pub fn wheel(&mut self, down: bool) {
        let ts = self.begin();
        let dir = if down { "-1" } else { "1" };
        self.push(ts, EventKey::K5, vec![dir.into()]);
    }

    // ------------------------------------------------------------------
    // Keyboard
    // ------------------------------------------------------------------

    fn key_code(&mut self, code: &str) {
        let ts = self.begin();
        self.push(ts, EventKey::K1, vec![code.into()]);
        self.push(ts + KEY_HOLD_MS, EventKey::K2, vec![code.into()]);
    }

    pub fn key(&mut self, code: u32) {
        self.key_code(&code.to_string());
    }

    /// Holds every key down in order, then releases in reverse.
    pub fn combo(&mut self, codes: &[&str]) {
        let mut last = 0;
        for c in codes {
            last = self.begin();
            self.push(last, EventKey::K1, vec![(*c).into()]);
        }
        for (i, c) in codes.iter().rev().enumerate() {
            self.push(last + KEY_HOLD_MS + 10 * i as u64, EventKey::K2, vec![(*c).into()]);
        }
    }

    /// Types `letters` text characters then `digits` numeric ones. Each
    /// character is mistyped with probability `1 - key_precision`: one to
    /// three wrong characters followed by as many backspaces.
    pub fn type_chars(&mut self, letters: usize, digits: usize) {
        let placeholders = std::iter::repeat_n(TEXT, letters).chain(std::iter::repeat_n(NUM, digits));
        for ch in placeholders.collect::<Vec<_>>() {
            if self.draw(1.0 - self.params.key_precision) {
                let wrong = self.rng.random_range(1..=3);
                for _ in 0..wrong {
                    self.key_code(TEXT);
                }
                for _ in 0..wrong {
                    self.key(BACKSPACE);
                }
            }
            self.key_code(ch);
        }
    }

    // ------------------------------------------------------------------
    // System reactions
    // ------------------------------------------------------------------

    /// Emits a burst of application events shortly after the last input.
    pub fn system(&mut self, burst: Vec<(EventKey, Vec<String>)>) {
        let mut ts = self.last_ts() + self.rng.random_range(120..350);
        for (key, params) in burst {
            self.push(ts, key, params);
            ts += self.rng.random_range(5..40);
        }
        self.t = self.last_ts();
        self.after_system = true;
    }

    pub fn spawn(&mut self, app: App, title: &str) -> Window {
        self.next_pid += self.rng.random_range(4..60);
        Window {
            app,
            pid: self.next_pid,
            title: title.into(),
            minimized: false,
        }
    }

    pub fn focused(&self) -> Option<&Window> {
        self.windows.iter().rev().find(|w| !w.minimized)
    }

    pub fn find(&self, app: App) -> Option<usize> {
        self.windows.iter().rposition(|w| w.app == app)
    }

    /// Moves window `i` to the front, un-minimizing it.
    pub fn raise(&mut self, i: usize) -> Window {
        let mut w = self.windows.remove(i);
        w.minimized = false;
        self.windows.push(w.clone());
        w
    }

    /// `PID#process` entries from the focused window outwards.
    pub fn hierarchy(&self) -> String {
        let mut parts: Vec<String> = self
            .windows
            .iter()
            .rev()
            .filter(|w| !w.minimized)
            .map(|w| format!("{}#{}", w.pid, w.app.process()))
            .collect();
        if parts.is_empty() {
            parts.push("4#explorer.exe".into());
        }
        parts.join(";")
    }
}

fn cell_params(c: Cell) -> Vec<String> {
    vec![c.x.to_string(), c.y.to_string()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn straight_moves_are_shortest() {
        let params = SimulationParams::default();
        let mut s = Session::new(&params, ChaCha8Rng::seed_from_u64(1));
        s.cursor = Cell::new(1, 1);
        s.move_to(Cell::new(4, 3));
        let cells: Vec<Cell> = s.events.iter().map(|e| e.cell().unwrap()).collect();
        assert_eq!(
            cells,
            [Cell::new(1, 1), Cell::new(2, 2), Cell::new(3, 3), Cell::new(4, 3)]
        );
    }

    #[test]
    fn detours_move_away_first() {
        let params = SimulationParams {
            mouse_precision: 0.0,
            ..SimulationParams::default()
        };
        let mut s = Session::new(&params, ChaCha8Rng::seed_from_u64(3));
        s.cursor = Cell::new(1, 1);
        s.move_to(Cell::new(3, 1));
        let cells: Vec<Cell> = s.events.iter().map(|e| e.cell().unwrap()).collect();
        assert!(cells.len() > 3, "{cells:?}");
        assert_eq!(*cells.last().unwrap(), Cell::new(3, 1));
    }

    #[test]
    fn median_delay_line() {
        assert_eq!(median_delay_ms(1.0), 328.0);
        assert!((median_delay_ms(0.3633) - 901.03).abs() < 0.01);
    }
}
