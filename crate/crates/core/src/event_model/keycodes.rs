//! Key codes recorded by the interaction logger.
//!
//! Only a fixed set of keys is logged verbatim. Every other keystroke is
//! anonymized to `TEXT` (alphabetic) or `NUM` (digits and arithmetic
//! operators).

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// Placeholder code for an anonymized alphabetic key.
pub const TEXT: &str = "TEXT";
/// Placeholder code for an anonymized numeric or operator key.
pub const NUM: &str = "NUM";

pub const LEFT_CTRL: u32 = 29;
pub const RIGHT_CTRL: u32 = 3613;
pub const LEFT_META: u32 = 3675;
pub const ENTER: u32 = 28;
pub const PAGE_DOWN: u32 = 3665;
pub const PAGE_UP: u32 = 3657;
pub const ESC: u32 = 1;
pub const LEFT_ALT: u32 = 56;
pub const RIGHT_ALT: u32 = 3640;
pub const SHIFT: u32 = 42;
pub const RIGHT_SHIFT: u32 = 54;
pub const LEFT_ARROW: u32 = 57419;
pub const UP_ARROW: u32 = 57416;
pub const RIGHT_ARROW: u32 = 57421;
pub const DOWN_ARROW: u32 = 57424;
pub const F1: u32 = 59;
pub const F4: u32 = 62;
pub const F5: u32 = 63;
pub const F11: u32 = 87;
pub const TAB: u32 = 15;
pub const BACKSPACE: u32 = 14;

pub const MOUSE_LEFT: u32 = 1;
pub const MOUSE_RIGHT: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputType {
    Keyboard,
    Mouse,
}

/// The table of recorded key codes, keyed by input device and code.
///
/// Keyboard code 1 (ESC) and mouse code 1 (left click) share a number, so the
/// device is part of the key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyCodeTable {
    entries: BTreeMap<(InputType, u32), String>,
}

impl KeyCodeTable {
    /// The shared, immutable table.
    pub fn standard() -> &'static KeyCodeTable {
        static TABLE: OnceLock<KeyCodeTable> = OnceLock::new();
        TABLE.get_or_init(Self::build)
    }

    fn build() -> Self {
        let mut entries = BTreeMap::new();
        let mut kb = |code: u32, desc: &str| {
            entries.insert((InputType::Keyboard, code), desc.to_string());
        };
        kb(LEFT_CTRL, "Left ctrl");
        kb(RIGHT_CTRL, "Right ctrl");
        kb(LEFT_META, "Left meta");
        kb(ENTER, "Enter");
        kb(PAGE_DOWN, "Page down");
        kb(PAGE_UP, "Page up");
        kb(ESC, "ESC");
        kb(LEFT_ALT, "Left alt");
        kb(RIGHT_ALT, "Right alt");
        kb(SHIFT, "Shift");
        kb(RIGHT_SHIFT, "Right shift");
        kb(LEFT_ARROW, "Left arrow");
        kb(UP_ARROW, "Top arrow");
        kb(RIGHT_ARROW, "Right arrow");
        kb(DOWN_ARROW, "Down arrow");
        for n in 0..10 {
            kb(F1 + n, &format!("F{}", n + 1));
        }
        kb(F11, "F11");
        kb(F11 + 1, "F12");
        kb(TAB, "Tab");
        kb(BACKSPACE, "Backspace");
        entries.insert((InputType::Mouse, MOUSE_LEFT), "Left click".to_string());
        entries.insert((InputType::Mouse, MOUSE_RIGHT), "Right click".to_string());
        Self { entries }
    }

    pub fn describe(&self, input: InputType, code: u32) -> Option<&str> {
        self.entries.get(&(input, code)).map(String::as_str)
    }

    pub fn contains(&self, input: InputType, code: u32) -> bool {
        self.entries.contains_key(&(input, code))
    }

    /// Whether `code` is acceptable in a keyboard event parameter slot.
    pub fn is_valid_keyboard_code(&self, code: &str) -> bool {
        code == TEXT
            || code == NUM
            || code
                .parse::<u32>()
                .is_ok_and(|c| self.contains(InputType::Keyboard, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (InputType, u32, &str)> {
        self.entries
            .iter()
            .map(|(&(input, code), desc)| (input, code, desc.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_rows() {
        let t = KeyCodeTable::standard();
        assert_eq!(t.describe(InputType::Keyboard, 28), Some("Enter"));
        assert_eq!(t.describe(InputType::Keyboard, 56), Some("Left alt"));
        assert_eq!(t.describe(InputType::Keyboard, 15), Some("Tab"));
        assert_eq!(t.describe(InputType::Keyboard, 1), Some("ESC"));
        assert_eq!(t.describe(InputType::Mouse, 1), Some("Left click"));
        assert_eq!(t.describe(InputType::Keyboard, 62), Some("F4"));
        assert_eq!(t.describe(InputType::Keyboard, 88), Some("F12"));
        // 17 single keys + F1..F12 + 2 mouse buttons
        assert_eq!(t.len(), 17 + 12 + 2);
    }

    #[test]
    fn anonymized_codes_are_valid() {
        let t = KeyCodeTable::standard();
        assert!(t.is_valid_keyboard_code("TEXT"));
        assert!(t.is_valid_keyboard_code("NUM"));
        assert!(t.is_valid_keyboard_code("3675"));
        assert!(!t.is_valid_keyboard_code("30"));
        assert!(!t.is_valid_keyboard_code("text"));
    }
}
