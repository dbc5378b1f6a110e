//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use audiogoal::gridworld::{Cell, OccupancyGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn open_room(w: usize, h: usize, res: f64) -> OccupancyGrid<f64> {
    let rows: Vec<String> = (0..h)
        .map(|r| {
            (0..w)
                .map(|c| if r == 0 || c == 0 || r + 1 == h || c + 1 == w { '#' } else { '.' })
                .collect()
        })
        .collect();
    OccupancyGrid::from_rows(res, &rows).unwrap()
}

/// Random map: closed border plus axis-aligned rectangular obstacles.
pub fn random_block_map(seed: u64, size: usize, blocks: usize, res: f64) -> OccupancyGrid<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut occ = vec![vec![false; size]; size];
    for r in 0..size {
        for c in 0..size {
            occ[r][c] = r == 0 || c == 0 || r + 1 == size || c + 1 == size;
        }
    }
    for _ in 0..blocks {
        let h = rng.random_range(1..size / 6);
        let w = rng.random_range(1..size / 6);
        let r0 = rng.random_range(1..size - h);
        let c0 = rng.random_range(1..size - w);
        for row in occ.iter_mut().skip(r0).take(h) {
            for cell in row.iter_mut().skip(c0).take(w) {
                *cell = true;
            }
        }
    }
    let rows: Vec<String> = occ
        .iter()
        .rev()
        .map(|r| r.iter().map(|&o| if o { '#' } else { '.' }).collect())
        .collect();
    OccupancyGrid::from_rows(res, &rows).unwrap()
}

fn free(grid: &OccupancyGrid<f64>, r: i64, c: i64) -> bool {
    grid.geometry().contains(r, c) && grid.is_free(Cell::new(r as usize, c as usize))
}

/// Dijkstra over the 16-connected lattice (axis, diagonal and knight moves).
/// A move is allowed only if every cell whose interior its straight segment
/// crosses is free. A diagonal step only touches its two flanking cells at a
/// corner point, so it is blocked only when both flanks are occupied.
pub fn dijkstra16(grid: &OccupancyGrid<f64>, source: Cell) -> Vec<f64> {
    let g = grid.geometry();
    let res = g.resolution;
    let mut dist = vec![f64::INFINITY; g.len()];
    let moves: Vec<(i64, i64)> = vec![
        (0, 1), (1, 0), (0, -1), (-1, 0),
        (1, 1), (1, -1), (-1, 1), (-1, -1),
        (1, 2), (2, 1), (-1, 2), (-2, 1), (1, -2), (2, -1), (-1, -2), (-2, -1),
    ];
    let mut heap = BinaryHeap::new();
    dist[g.index(source)] = 0.0;
    heap.push(Reverse((0u64, g.index(source))));
    let mut done = vec![false; g.len()];
    while let Some(Reverse((_, i))) = heap.pop() {
        if done[i] {
            continue;
        }
        done[i] = true;
        let c = g.cell_at(i);
        let (r0, c0) = (c.row as i64, c.col as i64);
        for &(dr, dc) in &moves {
            let (r1, c1) = (r0 + dr, c0 + dc);
            if !free(grid, r1, c1) {
                continue;
            }
            // cells swept by the move
            let ok = match (dr.abs(), dc.abs()) {
                (1, 1) => free(grid, r0 + dr, c0) || free(grid, r0, c0 + dc),
                (1, 2) => {
                    free(grid, r0, c0 + dc / 2)
                        && free(grid, r0 + dr, c0 + dc / 2)
                }
                (2, 1) => {
                    free(grid, r0 + dr / 2, c0)
                        && free(grid, r0 + dr / 2, c0 + dc)
                }
                _ => true,
            };
            if !ok {
                continue;
            }
            let j = g.index(Cell::new(r1 as usize, c1 as usize));
            let nd = dist[i] + ((dr * dr + dc * dc) as f64).sqrt() * res;
            if nd < dist[j] {
                dist[j] = nd;
                heap.push(Reverse(((nd * 1e9) as u64, j)));
            }
        }
    }
    dist
}

/// Dijkstra over the 4-connected lattice.
pub fn dijkstra4(grid: &OccupancyGrid<f64>, source: Cell) -> Vec<f64> {
    let g = grid.geometry();
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut queue = std::collections::VecDeque::from([source]);
    dist[g.index(source)] = 0.0;
    while let Some(c) = queue.pop_front() {
        let d = dist[g.index(c)];
        for n in g.neighbors4(c) {
            let j = g.index(n);
            if grid.is_free(n) && dist[j].is_infinite() {
                dist[j] = d + g.resolution;
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Whether the segment between two cell centers stays in free cells, by
/// dense sampling.
pub fn sampled_line_of_sight(grid: &OccupancyGrid<f64>, a: Cell, b: Cell) -> bool {
    let pa = grid.cell_center(a);
    let pb = grid.cell_center(b);
    let n = 400;
    (0..=n).all(|k| {
        let t = k as f64 / n as f64;
        let p = audiogoal::gridworld::Point::new(pa.x + (pb.x - pa.x) * t, pa.y + (pb.y - pa.y) * t);
        grid.is_free_point(p)
    })
}

/// Image sources of a rectangle `[0,w] x [0,h]` found by repeatedly mirroring
/// across the four walls, breadth first, up to `max_order` reflections.
/// Returns `(x, y, order)` for every distinct image, keeping its lowest order.
pub fn mirror_images(w: f64, h: f64, src: (f64, f64), max_order: u32) -> Vec<(f64, f64, u32)> {
    let key = |x: f64, y: f64| ((x * 1e6).round() as i64, (y * 1e6).round() as i64);
    let mut seen = std::collections::HashMap::new();
    let mut frontier = vec![(src.0, src.1)];
    seen.insert(key(src.0, src.1), (src.0, src.1, 0u32));
    for order in 1..=max_order {
        let mut next = Vec::new();
        for &(x, y) in &frontier {
            for (nx, ny) in [(-x, y), (2.0 * w - x, y), (x, -y), (x, 2.0 * h - y)] {
                let k = key(nx, ny);
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(k) {
                    e.insert((nx, ny, order));
                    next.push((nx, ny));
                }
            }
        }
        frontier = next;
    }
    seen.into_values().collect()
}

/// Expected taps `(delay, amplitude)` from mirrored images, sorted by delay.
pub fn mirror_taps(
    w: f64,
    h: f64,
    rho: f64,
    src: (f64, f64),
    rcv: (f64, f64),
    max_order: u32,
) -> Vec<(f64, f64)> {
    let mut taps: Vec<(f64, f64)> = mirror_images(w, h, src, max_order)
        .into_iter()
        .map(|(x, y, order)| {
            let d = ((x - rcv.0).powi(2) + (y - rcv.1).powi(2)).sqrt();
            (d / 343.0, rho.powi(order as i32) / d.max(0.1))
        })
        .collect();
    taps.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    taps
}
