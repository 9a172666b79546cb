//! Max-parity games solved by the recursive attractor algorithm, with
//! memoryless strategy extraction for both players.

/// Player 0 maximizes even priorities, player 1 odd ones.
pub type Player = u8;

#[derive(Debug, Clone)]
pub struct ParityGame {
    pub owner: Vec<Player>,
    pub priority: Vec<u32>,
    pub succ: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub winner: Vec<Player>,
    /// Winning move per vertex, meaningful where owner == winner.
    pub strategy: Vec<Option<usize>>,
}

impl ParityGame {
    pub fn vertices(&self) -> usize {
        self.owner.len()
    }

    /// Every vertex must have a successor; totalize arenas before solving.
    pub fn solve(&self) -> Solution {
        debug_assert!(self.succ.iter().all(|s| !s.is_empty()));
        let mut winner = vec![0u8; self.vertices()];
        let mut strategy = vec![None; self.vertices()];
        let mut alive = vec![true; self.vertices()];
        self.zielonka(&mut alive, &mut winner, &mut strategy);
        Solution { winner, strategy }
    }

    /// Attractor of player `p` to `targets` within `alive`; records the
    /// attracting move for p-owned vertices outside the target set.
    fn attractor(
        &self,
        p: Player,
        targets: &[usize],
        alive: &[bool],
        strategy: &mut [Option<usize>],
    ) -> Vec<bool> {
        let n = self.vertices();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut out_count = vec![0usize; n];
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            for &w in &self.succ[v] {
                if alive[w] {
                    preds[w].push(v);
                    out_count[v] += 1;
                }
            }
        }
        let mut in_attr = vec![false; n];
        let mut queue: Vec<usize> = Vec::new();
        for &t in targets {
            if alive[t] && !in_attr[t] {
                in_attr[t] = true;
                queue.push(t);
            }
        }
        let mut remaining = out_count;
        while let Some(w) = queue.pop() {
            for &v in &preds[w] {
                if in_attr[v] {
                    continue;
                }
                if self.owner[v] == p {
                    in_attr[v] = true;
                    strategy[v] = Some(w);
                    queue.push(v);
                } else {
                    remaining[v] -= 1;
                    if remaining[v] == 0 {
                        in_attr[v] = true;
                        queue.push(v);
                    }
                }
            }
        }
        in_attr
    }

    fn zielonka(&self, alive: &mut Vec<bool>, winner: &mut [Player], strategy: &mut [Option<usize>]) {
        let verts: Vec<usize> = (0..self.vertices()).filter(|&v| alive[v]).collect();
        if verts.is_empty() {
            return;
        }
        let d = verts.iter().map(|&v| self.priority[v]).max().unwrap();
        let p: Player = (d % 2 == 1) as u8;
        let opp = 1 - p;
        let targets: Vec<usize> = verts
            .iter()
            .copied()
            .filter(|&v| self.priority[v] == d)
            .collect();
        let mut astrat = vec![None; self.vertices()];
        let attr = self.attractor(p, &targets, alive, &mut astrat);
        let sub: Vec<bool> = (0..self.vertices())
            .map(|v| alive[v] && !attr[v])
            .collect();
        let mut w1 = vec![0u8; self.vertices()];
        let mut s1 = vec![None; self.vertices()];
        self.zielonka(&mut sub.clone(), &mut w1, &mut s1);
        let opp_wins: Vec<usize> = (0..self.vertices())
            .filter(|&v| sub[v] && w1[v] == opp)
            .collect();
        if opp_wins.is_empty() {
            for &v in &verts {
                winner[v] = p;
                if self.owner[v] != p {
                    continue;
                }
                if sub[v] {
                    strategy[v] = s1[v];
                } else if astrat[v].is_some() {
                    strategy[v] = astrat[v];
                } else {
                    // a top-priority vertex: any move staying alive works
                    strategy[v] = self.succ[v].iter().copied().find(|&w| alive[w]);
                }
            }
        } else {
            let mut bstrat = vec![None; self.vertices()];
            let battr = self.attractor(opp, &opp_wins, alive, &mut bstrat);
            let mut rest: Vec<bool> = (0..self.vertices())
                .map(|v| alive[v] && !battr[v])
                .collect();
            let mut w2 = vec![0u8; self.vertices()];
            let mut s2 = vec![None; self.vertices()];
            self.zielonka(&mut rest, &mut w2, &mut s2);
            for &v in &verts {
                if battr[v] {
                    winner[v] = opp;
                    if self.owner[v] == opp {
                        strategy[v] = if sub[v] && w1[v] == opp && s1[v].is_some() {
                            s1[v]
                        } else {
                            bstrat[v]
                        };
                    }
                } else {
                    winner[v] = w2[v];
                    if self.owner[v] == w2[v] {
                        strategy[v] = s2[v];
                    }
                }
            }
        }
        // callers reuse `alive` unchanged
        let _ = alive;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(owner: Vec<u8>, priority: Vec<u32>, succ: Vec<Vec<usize>>) -> ParityGame {
        ParityGame {
            owner,
            priority,
            succ,
        }
    }

    #[test]
    fn self_loops_decide_by_parity() {
        let g = game(vec![0, 1], vec![2, 1], vec![vec![0], vec![1]]);
        let s = g.solve();
        assert_eq!(s.winner, vec![0, 1]);
    }

    #[test]
    fn even_escapes_to_even_loop() {
        // v0 (even's choice, prio 1) -> v1 (prio 2 loop) or v2 (prio 1 loop)
        let g = game(
            vec![0, 0, 0],
            vec![1, 2, 1],
            vec![vec![1, 2], vec![1], vec![2]],
        );
        let s = g.solve();
        assert_eq!(s.winner[0], 0);
        assert_eq!(s.strategy[0], Some(1));
    }

    #[test]
    fn odd_forces_bad_loop() {
        // v0 owned by odd, can go to even loop or odd loop
        let g = game(
            vec![1, 0, 0],
            vec![1, 2, 1],
            vec![vec![1, 2], vec![1], vec![2]],
        );
        let s = g.solve();
        assert_eq!(s.winner[0], 1);
        assert_eq!(s.strategy[0], Some(2));
    }

    #[test]
    fn alternating_cycle_max_priority_wins() {
        // two-vertex cycle with priorities 3 and 2: max is odd
        let g = game(vec![0, 1], vec![3, 2], vec![vec![1], vec![0]]);
        let s = g.solve();
        assert_eq!(s.winner, vec![1, 1]);
    }

    /// Brute-force verification on random small games: simulate both
    /// memoryless strategies extracted by the solver and check the claimed
    /// winner actually wins the resulting single play from each vertex.
    #[test]
    fn strategies_win_their_regions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(2..=7usize);
            let owner: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let priority: Vec<u32> = (0..n).map(|_| rng.gen_range(0..5)).collect();
            let succ: Vec<Vec<usize>> = (0..n)
                .map(|_| {
                    let deg = rng.gen_range(1..=3usize);
                    (0..deg).map(|_| rng.gen_range(0..n)).collect()
                })
                .collect();
            let g = game(owner, priority, succ);
            let s = g.solve();
            // counter-strategy search: opponent plays every memoryless
            // strategy? exponential; instead check consistency: from every
            // vertex, any play where the winner follows the strategy and the
            // opponent plays arbitrarily (all one-step choices explored via
            // product cycle analysis) satisfies the winner's objective
            for start in 0..g.vertices() {
                let w = s.winner[start];
                assert!(
                    play_all_respecting(&g, &s, start, w),
                    "claimed winner {w} at {start} loses some play: {g:?}"
                );
            }
        }
    }

    /// Check that every play from `start` where player `w` follows the
    /// extracted strategy has its maximal cycle priority of parity `w`.
    /// Explores the finite graph of strategy-restricted moves.
    fn play_all_respecting(g: &ParityGame, s: &Solution, start: usize, w: u8) -> bool {
        // restricted edges
        let edges = |v: usize| -> Vec<usize> {
            if g.owner[v] == w {
                vec![s.strategy[v].expect("winner must have a move")]
            } else {
                g.succ[v].clone()
            }
        };
        // every reachable cycle must have max priority of parity w; check
        // via cycle detection over (vertex) with max-priority tracking on
        // all simple cycles of the restricted graph (small n: DFS)
        let n = g.vertices();
        let mut reach = vec![false; n];
        let mut stack = vec![start];
        reach[start] = true;
        while let Some(v) = stack.pop() {
            for u in edges(v) {
                if !reach[u] {
                    reach[u] = true;
                    stack.push(u);
                }
            }
        }
        // enumerate simple cycles among reachable vertices
        for anchor in 0..n {
            if !reach[anchor] {
                continue;
            }
            let mut path = vec![anchor];
            let mut on = vec![false; n];
            on[anchor] = true;
            if !cycles_ok(g, &edges, anchor, &mut path, &mut on, w) {
                return false;
            }
        }
        true
    }

    fn cycles_ok(
        g: &ParityGame,
        edges: &dyn Fn(usize) -> Vec<usize>,
        anchor: usize,
        path: &mut Vec<usize>,
        on: &mut Vec<bool>,
        w: u8,
    ) -> bool {
        let v = *path.last().unwrap();
        for u in edges(v) {
            if u == anchor {
                let maxp = path.iter().map(|&x| g.priority[x]).max().unwrap();
                if (maxp % 2) as u8 != if w == 0 { 0 } else { 1 } {
                    return false;
                }
            } else if u > anchor && !on[u] {
                path.push(u);
                on[u] = true;
                let ok = cycles_ok(g, edges, anchor, path, on, w);
                on[u] = false;
                path.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}
