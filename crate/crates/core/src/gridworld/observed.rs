use super::{Cell, GridGeometry, Traversable};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellState {
    Unknown,
    Free,
    Occupied,
}

/// The agent's partial map. Known cells never revert to unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedMap<T> {
    geometry: GridGeometry<T>,
    states: Vec<CellState>,
}

impl<T: Real> ObservedMap<T> {
    /// All cells unknown except `start`, which the agent stands on.
    pub fn new(geometry: GridGeometry<T>, start: Cell) -> Self {
        let mut states = vec![CellState::Unknown; geometry.len()];
        states[geometry.index(start)] = CellState::Free;
        Self { geometry, states }
    }

    pub fn geometry(&self) -> &GridGeometry<T> {
        &self.geometry
    }

    pub fn state(&self, cell: Cell) -> CellState {
        self.states[self.geometry.index(cell)]
    }

    pub fn mark_free(&mut self, cell: Cell) {
        let i = self.geometry.index(cell);
        debug_assert_ne!(self.states[i], CellState::Occupied, "observation disagrees at {cell:?}");
        if self.states[i] == CellState::Unknown {
            self.states[i] = CellState::Free;
        }
    }

    pub fn mark_occupied(&mut self, cell: Cell) {
        let i = self.geometry.index(cell);
        debug_assert_ne!(self.states[i], CellState::Free, "observation disagrees at {cell:?}");
        if self.states[i] == CellState::Unknown {
            self.states[i] = CellState::Occupied;
        }
    }

    pub fn known_count(&self) -> usize {
        self.states.iter().filter(|s| **s != CellState::Unknown).count()
    }
}

/// Unknown cells count as passable: the planner is optimistic.
impl<T: Real> Traversable<T> for ObservedMap<T> {
    fn geometry(&self) -> &GridGeometry<T> {
        &self.geometry
    }

    fn passable(&self, cell: Cell) -> bool {
        self.state(cell) != CellState::Occupied
    }
}
