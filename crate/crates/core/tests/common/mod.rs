//! Helpers shared by integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use ttp_core::Tournament;

/// Bit `16*slot + 4*home + away` (0-based) per match.
fn key(matches: impl IntoIterator<Item = (usize, usize, usize)>) -> u128 {
    matches.into_iter().fold(0, |acc, (k, h, a)| acc | 1u128 << (16 * k + 4 * h + a))
}

/// Brute force over slot assignments for four teams, sharing no code with
/// the enumerator: every slot independently gets one of 3 matchings in one of
/// 4 orientations, and a candidate is kept when all 12 ordered pairs occur once.
pub fn brute_force() -> HashSet<u128> {
    let mut opts: Vec<[(usize, usize); 2]> = Vec::new();
    for m in [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]] {
        for o in 0..4 {
            let flip = |(a, b): (usize, usize), f: bool| if f { (b, a) } else { (a, b) };
            opts.push([flip(m[0], o & 1 == 1), flip(m[1], o & 2 == 2)]);
        }
    }
    let mut found = HashSet::new();
    let mut idx = [0usize; 6];
    loop {
        let mut seen = 0u16;
        let valid = idx.iter().all(|&o| {
            opts[o].iter().all(|&(h, a)| {
                let bit = 1u16 << (4 * h + a);
                let fresh = seen & bit == 0;
                seen |= bit;
                fresh
            })
        });
        if valid {
            found.insert(key(idx.iter().enumerate().flat_map(|(k, &o)| opts[o].map(|(h, a)| (k, h, a)))));
        }
        let mut p = 0;
        loop {
            idx[p] += 1;
            if idx[p] < opts.len() {
                break;
            }
            idx[p] = 0;
            p += 1;
            if p == 6 {
                return found;
            }
        }
    }
}

pub fn key_of(t: &Tournament) -> u128 {
    key(t.matches().into_iter().map(|m| (m.slot.get() - 1, m.home.get() - 1, m.away.get() - 1)))
}

