//! The summary task: read two company data files, compute with the
//! calculator and write the results into a new summary file.
//!
//! Screen layout on the 4x4 grid (x = column, y = row):
//! taskbar on row 4 with explorer, notepad and calculator icons, window
//! thumbnails one row above their icon, window buttons on row 1.

use rand::Rng;
use serde::Serialize;

use crate::event_model::keycodes::{
    DOWN_ARROW, ENTER, F4, F5, LEFT_ALT, LEFT_CTRL, LEFT_META, NUM, TAB, TEXT,
};
use crate::event_model::{Cell, EventKey};

use super::session::{App, Session, Window};

const fn cell(x: u8, y: u8) -> Cell {
    Cell { x, y }
}

const TASKBAR_EXPLORER: Cell = cell(1, 4);
const TASKBAR_NOTEPAD: Cell = cell(2, 4);
const TASKBAR_CALCULATOR: Cell = cell(3, 4);
const MINIMIZE_BUTTON: Cell = cell(3, 1);
const CLOSE_BUTTON: Cell = cell(4, 1);
const ADDRESS_BAR: Cell = cell(2, 1);
const FILE_MENU: Cell = cell(1, 1);
const SAVE_ITEM: Cell = cell(1, 2);
const FOLDER_DOCUMENTS: Cell = cell(1, 2);
const FOLDER_COMPANY_DATA: Cell = cell(2, 2);
const FOLDER_SUMMARIES: Cell = cell(3, 2);
const DATA_FILES: [Cell; 2] = [cell(1, 3), cell(2, 3)];
const SUMMARY_FILE: Cell = cell(1, 2);
const EMPTY_AREA: Cell = cell(3, 3);
const NEW_DOCUMENT_ITEM: Cell = cell(4, 3);

/// Keypad cells clicked to compute revenue minus expenses per data file.
const KEYPAD_SEQUENCES: [[Cell; 7]; 2] = [
    [cell(2, 2), cell(3, 2), cell(2, 3), cell(4, 2), cell(3, 3), cell(2, 2), cell(4, 3)],
    [cell(3, 2), cell(2, 3), cell(4, 2), cell(2, 2), cell(3, 3), cell(4, 2), cell(4, 3)],
];

const HOME: &str = "C:/users/employee";
const DATA_PATH: &str = "C:/users/employee/documents/company_data";
const SUMMARY_PATH: &str = "C:/users/employee/documents/company_data/summaries";

/// Likelihood deciding between two realizations of a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gate {
    Minimize,
    AppClosing,
    AppOpenOrReopen,
    Search,
    HotkeyUsage,
    Repetition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Subtask {
    OpenExplorer,
    NavigateToData,
    ProcessFile(usize),
    NavigateToSummaries,
    CreateSummary,
    WriteSummary,
}

/// Static description of one subtask.
#[derive(Debug, Clone, Serialize)]
pub struct SubtaskSpec {
    pub subtask: Subtask,
    pub name: &'static str,
    pub gates: &'static [Gate],
    /// Subtasks that must be finished first.
    pub after: &'static [Subtask],
    pub terminating_action: &'static str,
}

/// The scenario's subtasks in canonical order.
pub fn scenario() -> Vec<SubtaskSpec> {
    use Subtask::*;
    vec![
        SubtaskSpec {
            subtask: OpenExplorer,
            name: "open explorer",
            gates: &[Gate::HotkeyUsage],
            after: &[],
            terminating_action: "explorer open",
        },
        SubtaskSpec {
            subtask: NavigateToData,
            name: "change location to documents/company data",
            gates: &[Gate::Search],
            after: &[OpenExplorer],
            terminating_action: "explorer path to company_data",
        },
        SubtaskSpec {
            subtask: ProcessFile(0),
            name: "calculate first product",
            gates: &[
                Gate::HotkeyUsage,
                Gate::Minimize,
                Gate::AppClosing,
                Gate::AppOpenOrReopen,
                Gate::Repetition,
            ],
            after: &[NavigateToData],
            terminating_action: "explorer maximize",
        },
        SubtaskSpec {
            subtask: ProcessFile(1),
            name: "calculate second product",
            gates: &[
                Gate::HotkeyUsage,
                Gate::Minimize,
                Gate::AppClosing,
                Gate::AppOpenOrReopen,
                Gate::Repetition,
            ],
            after: &[NavigateToData],
            terminating_action: "explorer maximize",
        },
        SubtaskSpec {
            subtask: NavigateToSummaries,
            name: "change location to documents/company data/summaries",
            gates: &[Gate::Search],
            after: &[ProcessFile(0), ProcessFile(1)],
            terminating_action: "explorer path to summaries",
        },
        SubtaskSpec {
            subtask: CreateSummary,
            name: "create summary file",
            gates: &[],
            after: &[NavigateToSummaries],
            terminating_action: "explorer rename",
        },
        SubtaskSpec {
            subtask: WriteSummary,
            name: "write summary",
            gates: &[Gate::HotkeyUsage, Gate::AppClosing],
            after: &[CreateSummary],
            terminating_action: "notepad close",
        },
    ]
}

/// Canonical order with probability `sequential`, otherwise a uniformly
/// drawn step-by-step topological order of the dependency graph.
pub fn subtask_order(session: &mut Session<'_>) -> Vec<Subtask> {
    let specs = scenario();
    if session.draw(session.params.sequential) {
        return specs.iter().map(|s| s.subtask).collect();
    }
    let mut done: Vec<Subtask> = Vec::new();
    while done.len() < specs.len() {
        let ready: Vec<Subtask> = specs
            .iter()
            .filter(|s| !done.contains(&s.subtask) && s.after.iter().all(|a| done.contains(a)))
            .map(|s| s.subtask)
            .collect();
        let pick = ready[session.rng.random_range(0..ready.len())];
        done.push(pick);
    }
    done
}

// ============================================================================
// Window events
// ============================================================================

fn open_burst(s: &mut Session<'_>, w: &Window) {
    s.windows.push(w.clone());
    let burst = vec![
        (
            EventKey::A1,
            vec![
                w.pid.to_string(),
                w.app.process().into(),
                w.title.clone(),
                "800".into(),
                "600".into(),
                "100".into(),
                "80".into(),
            ],
        ),
        (EventKey::A7, vec![s.hierarchy()]),
    ];
    s.system(burst);
}

fn close_burst(s: &mut Session<'_>, i: usize) {
    let w = s.windows.remove(i);
    let burst = vec![
        (EventKey::A2, vec![w.pid.to_string(), w.app.process().into(), w.title]),
        (EventKey::A7, vec![s.hierarchy()]),
    ];
    s.system(burst);
}

fn minimize_burst(s: &mut Session<'_>, i: usize) {
    s.windows[i].minimized = true;
    let w = s.windows[i].clone();
    let burst = vec![
        (EventKey::A4, vec![w.pid.to_string(), w.app.process().into()]),
        (EventKey::A7, vec![s.hierarchy()]),
    ];
    s.system(burst);
}

/// Brings window `i` to the front: restoring a minimized window or the
/// explorer reads as a maximize, otherwise as a focus change.
fn raise_burst(s: &mut Session<'_>, i: usize) {
    let was_minimized = s.windows[i].minimized;
    let w = s.raise(i);
    let mut burst = Vec::new();
    if was_minimized || w.app == App::Explorer {
        burst.push((EventKey::A3, vec![w.pid.to_string(), w.app.process().into()]));
        burst.push((
            EventKey::A6,
            vec![
                w.pid.to_string(),
                w.app.process().into(),
                "1920".into(),
                "1040".into(),
                "0".into(),
                "0".into(),
            ],
        ));
    }
    burst.push((EventKey::A7, vec![s.hierarchy()]));
    s.system(burst);
}

fn path_burst(s: &mut Session<'_>, old: &str, new: &str) {
    let pid = s.windows[s.find(App::Explorer).expect("explorer open")].pid;
    s.system(vec![(EventKey::A8, vec![pid.to_string(), old.into(), new.into()])]);
}

fn rename_burst(s: &mut Session<'_>, app: App, title: &str) {
    let i = s.find(app).expect("window open");
    s.windows[i].title = title.into();
    let w = s.windows[i].clone();
    s.system(vec![(EventKey::A5, vec![w.pid.to_string(), w.app.process().into(), w.title])]);
}

// ============================================================================
// Realizations
// ============================================================================

fn taskbar(app: App) -> Cell {
    match app {
        App::Explorer => TASKBAR_EXPLORER,
        App::Notepad => TASKBAR_NOTEPAD,
        App::Calculator => TASKBAR_CALCULATOR,
    }
}

/// Switches to an open window: Alt+Tab or taskbar icon plus thumbnail.
fn switch_to(s: &mut Session<'_>, app: App) {
    let Some(i) = s.find(app) else { return };
    if s.focused().is_some_and(|w| w.app == app && w.pid == s.windows[i].pid) {
        return;
    }
    if s.draw(s.params.hotkey_usage) {
        s.combo(&[&LEFT_ALT.to_string(), &TAB.to_string()]);
    } else {
        let icon = taskbar(app);
        s.click(icon);
        s.click(Cell::new(icon.x, icon.y - 1));
    }
    raise_burst(s, i);
}

fn close_focused(s: &mut Session<'_>, app: App) {
    let Some(i) = s.find(app) else { return };
    if s.draw(s.params.hotkey_usage) {
        s.combo(&[&LEFT_ALT.to_string(), &F4.to_string()]);
    } else {
        s.click(CLOSE_BUTTON);
    }
    close_burst(s, i);
}

fn open_explorer(s: &mut Session<'_>) {
    if s.draw(s.params.hotkey_usage) {
        s.combo(&[&LEFT_META.to_string(), TEXT]);
    } else {
        s.click(TASKBAR_EXPLORER);
    }
    let w = s.spawn(App::Explorer, "employee");
    open_burst(s, &w);
}

fn navigate(s: &mut Session<'_>, from: &str, folders: &[(Cell, &str)], typed_letters: usize) {
    if s.draw(s.params.search) {
        s.click(ADDRESS_BAR);
        s.type_chars(typed_letters, 0);
        s.key(ENTER);
        let target = folders.last().expect("at least one folder").1;
        path_burst(s, from, target);
    } else {
        let mut at = from.to_string();
        for (c, path) in folders {
            s.double_click(*c);
            path_burst(s, &at, path);
            at = (*path).to_string();
        }
    }
}

fn open_file(s: &mut Session<'_>, file: Cell, title: &str) {
    s.double_click(file);
    let w = s.spawn(App::Notepad, title);
    open_burst(s, &w);
}

fn read(s: &mut Session<'_>, scrolls: std::ops::RangeInclusive<u32>) {
    s.pause(6.0);
    let n = s.rng.random_range(scrolls);
    for _ in 0..n {
        s.wheel(true);
    }
}

fn bring_calculator(s: &mut Session<'_>) {
    // a repeating user opens the calculator again instead of reusing it
    let reuse = s.find(App::Calculator).is_some()
        && !s.draw(s.params.app_open_or_reopen)
        && !s.draw(s.params.repetition);
    if reuse {
        switch_to(s, App::Calculator);
        return;
    }
    if s.draw(s.params.hotkey_usage) {
        s.combo(&[&LEFT_META.to_string(), NUM]);
    } else {
        s.click(TASKBAR_CALCULATOR);
    }
    let w = s.spawn(App::Calculator, "Calculator");
    open_burst(s, &w);
}

fn minimize_calculator(s: &mut Session<'_>) {
    let Some(i) = s.find(App::Calculator) else { return };
    if s.draw(s.params.hotkey_usage) {
        s.combo(&[&LEFT_META.to_string(), &DOWN_ARROW.to_string()]);
    } else {
        s.click(MINIMIZE_BUTTON);
    }
    minimize_burst(s, i);
}

fn process_file(s: &mut Session<'_>, k: usize) {
    let title = format!("product{}.txt", k + 1);
    open_file(s, DATA_FILES[k], &title);
    read(s, 3..=5);
    if s.draw(s.params.repetition) {
        // back to the top to read it again
        s.wheel(false);
    }
    bring_calculator(s);
    for c in KEYPAD_SEQUENCES[k] {
        s.click(c);
    }
    if s.draw(s.params.minimize) {
        minimize_calculator(s);
        if s.draw(s.params.repetition) {
            switch_to(s, App::Calculator);
            minimize_calculator(s);
        }
    }
    if s.draw(s.params.app_closing) {
        switch_to(s, App::Notepad);
        if s.draw(s.params.repetition) {
            // check the numbers once more before closing
            s.pause(2.0);
            s.wheel(false);
        }
        close_focused(s, App::Notepad);
    }
    switch_to(s, App::Explorer);
    if s.draw(s.params.repetition) {
        // read the same file once more; it is still selected in the explorer
        if s.draw(s.params.hotkey_usage) {
            s.key(ENTER);
            let w = s.spawn(App::Notepad, &title);
            open_burst(s, &w);
        } else {
            open_file(s, DATA_FILES[k], &title);
        }
        read(s, 1..=2);
        close_focused(s, App::Notepad);
        switch_to(s, App::Explorer);
    }
}

fn create_summary(s: &mut Session<'_>) {
    s.right_click(EMPTY_AREA);
    s.click(NEW_DOCUMENT_ITEM);
    s.type_chars(7, 0);
    // clicking next to the name field commits it
    s.click(cell(4, 2));
    rename_burst(s, App::Explorer, "summaries");
    if s.draw(s.params.repetition) {
        // refresh to make sure the new file is there
        s.key(F5);
    }
}

fn save(s: &mut Session<'_>) {
    if s.draw(s.params.hotkey_usage) {
        s.combo(&[&LEFT_CTRL.to_string(), TEXT]);
    } else {
        s.click(FILE_MENU);
        s.click(SAVE_ITEM);
    }
}

fn write_summary(s: &mut Session<'_>) {
    open_file(s, SUMMARY_FILE, "summary.txt");
    for _ in 0..2 {
        s.type_chars(6, 4);
        s.key(ENTER);
    }
    save(s);
    rename_burst(s, App::Notepad, "summary.txt - saved");
    if s.draw(s.params.repetition) {
        s.pause(1.0);
        save(s);
    }
    if s.draw(s.params.app_closing) {
        close_focused(s, App::Notepad);
    }
}

/// Performs one subtask.
pub fn realize_subtask(s: &mut Session<'_>, subtask: Subtask) {
    match subtask {
        Subtask::OpenExplorer => open_explorer(s),
        Subtask::NavigateToData => {
            if s.find(App::Explorer).is_none() {
                open_explorer(s);
            }
            navigate(
                s,
                HOME,
                &[(FOLDER_DOCUMENTS, "C:/users/employee/documents"), (FOLDER_COMPANY_DATA, DATA_PATH)],
                12,
            )
        }
        Subtask::ProcessFile(k) => process_file(s, k),
        Subtask::NavigateToSummaries => {
            switch_to(s, App::Explorer);
            navigate(s, DATA_PATH, &[(FOLDER_SUMMARIES, SUMMARY_PATH)], 7)
        }
        Subtask::CreateSummary => create_summary(s),
        Subtask::WriteSummary => write_summary(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_respects_dependencies() {
        let specs = scenario();
        for (i, s) in specs.iter().enumerate() {
            for dep in s.after {
                let j = specs.iter().position(|x| x.subtask == *dep).unwrap();
                assert!(j < i);
            }
        }
    }

    #[test]
    fn keypad_clicks_change_cell() {
        for seq in KEYPAD_SEQUENCES {
            for w in seq.windows(2) {
                assert_ne!(w[0], w[1]);
            }
        }
    }
}
