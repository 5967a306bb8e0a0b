//! Shared memo table for staged membership procedures.
//!
//! Entries record the budget they were computed at. Resolved answers are
//! reused at any budget at least that large; an entry computed at a
//! larger budget is never served to a smaller-budget query, so clearing a
//! table can only cost speed, never change a resolved answer.

use crate::membership::Membership;
use crate::point::Point;
use std::collections::HashMap;
use std::sync::RwLock;

pub struct MemoTable {
    map: RwLock<HashMap<Point, (Membership, u64)>>,
}

impl MemoTable {
    pub fn new() -> Self {
        MemoTable {
            map: RwLock::new(HashMap::new()),
        }
    }

    pub fn get(&self, x: &Point, horizon: u64) -> Option<Membership> {
        let map = self.map.read().unwrap();
        let (m, at) = map.get(x)?;
        match m {
            Membership::In | Membership::Out if *at <= horizon => Some(*m),
            Membership::Unknown(_) if *at >= horizon => Some(*m),
            _ => None,
        }
    }

    pub fn put(&self, x: Point, horizon: u64, m: Membership) {
        let mut map = self.map.write().unwrap();
        map.insert(x, (m, horizon));
    }

    pub fn clear(&self) {
        self.map.write().unwrap().clear();
    }
}

impl Default for MemoTable {
    fn default() -> Self {
        Self::new()
    }
}
