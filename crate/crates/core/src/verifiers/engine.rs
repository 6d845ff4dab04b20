//! The decision primitives used by the statement checks, available through
//! two routes: the mask solver, and the plain backtracking oracle. Checks are
//! written once against [`Eng`]; `verify` runs them on the solver and
//! `recheck` on the oracle.

use std::ops::ControlFlow;

use crate::color::{Color, ColorSet};
use crate::embedding::{bit, mask_iter, mask_of, PlanarEmbedding, Vertex};
use crate::lists::{check_coloring, reduced_list, ListAssignment, PartialColoring};
use crate::oracle;
use crate::solver::{Budget, Ctx, Timeout};
use crate::structure::{crown_walk, end_walk, lambda_raw, terminal_neighbors};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Route {
    Solver,
    Oracle,
}

pub(crate) struct Eng<'a> {
    pub emb: &'a PlanarEmbedding,
    pub lists: &'a ListAssignment,
    pub route: Route,
    ctx: Ctx<'a>,
}

impl<'a> Eng<'a> {
    pub fn new(route: Route, emb: &'a PlanarEmbedding, lists: &'a ListAssignment) -> Self {
        Eng { emb, lists, route, ctx: Ctx::new(emb, lists) }
    }

    pub fn n(&self) -> usize {
        self.emb.vertex_count()
    }

    pub fn valid(&self, phi: &PartialColoring) -> bool {
        check_coloring(self.emb, self.lists, phi).is_ok()
    }

    pub fn extension(&self, phi: &PartialColoring, budget: &mut Budget) -> Result<Option<Vec<Color>>, Timeout> {
        if !self.valid(phi) {
            return Ok(None);
        }
        match self.route {
            Route::Solver => {
                let (dom, mut colors) = phi.packed();
                Ok(self.ctx.extend(dom, &mut colors, self.ctx.all(), budget)?.then(|| colors[..self.n()].to_vec()))
            }
            Route::Oracle => Ok(oracle::extension(self.emb, self.lists, phi)),
        }
    }

    pub fn extends(&self, phi: &PartialColoring, budget: &mut Budget) -> Result<bool, Timeout> {
        Ok(self.extension(phi, budget)?.is_some())
    }

    /// Colors on `x` used by some full extension of `phi`.
    pub fn achievable(&self, phi: &PartialColoring, x: Vertex, budget: &mut Budget) -> Result<ColorSet, Timeout> {
        if !self.valid(phi) {
            return Ok(ColorSet::EMPTY);
        }
        match self.route {
            Route::Solver => {
                let (dom, colors) = phi.packed();
                if dom & bit(x) != 0 {
                    let mut c = colors;
                    return Ok(if self.ctx.extend(dom, &mut c, self.ctx.all(), budget)? {
                        ColorSet::singleton(colors[x])
                    } else {
                        ColorSet::EMPTY
                    });
                }
                self.ctx.achievable(dom, &colors, x, budget)
            }
            Route::Oracle => Ok(oracle::achievable(self.emb, self.lists, phi, x)),
        }
    }

    /// `phi` is an L-coloring and is (H, G)-sufficient.
    pub fn sufficient(&self, phi: &PartialColoring, h: &[Vertex], budget: &mut Budget) -> Result<bool, Timeout> {
        if !self.valid(phi) {
            return Ok(false);
        }
        match self.route {
            Route::Solver => {
                let (dom, colors) = phi.packed();
                Ok(self.ctx.insufficiency(dom, &colors, mask_of(h) & !dom, budget)?.is_none())
            }
            Route::Oracle => Ok(oracle::sufficient(self.emb, self.lists, phi, h)),
        }
    }

    pub fn lambda(
        &self,
        path: [Vertex; 3],
        slots: [Option<Color>; 3],
        budget: &mut Budget,
    ) -> Result<ColorSet, Timeout> {
        let open = (0..3).find(|&i| slots[i].is_none()).expect("one open slot");
        match self.route {
            Route::Solver => lambda_raw(&self.ctx, path, slots, open, budget),
            Route::Oracle => Ok(oracle::lambda(self.emb, self.lists, path, slots)),
        }
    }

    /// `Λ(•, b, a)` for every `b ∈ L(p2) ∖ {a}`.
    fn first_slot(&self, p: [Vertex; 3], a: Color, budget: &mut Budget) -> Result<Vec<(Color, ColorSet)>, Timeout> {
        let mut out = Vec::new();
        for b in self.lists.get(p[1]).without(a) {
            out.push((b, self.lambda(p, [None, Some(b), Some(a)], budget)?));
        }
        Ok(out)
    }

    pub fn universal(&self, p: [Vertex; 3], a: Color, budget: &mut Budget) -> Result<bool, Timeout> {
        let l1 = self.lists.get(p[0]);
        Ok(self.first_slot(p, a, budget)?.into_iter().all(|(b, s)| s == l1.without(b)))
    }

    pub fn almost_universal(&self, p: [Vertex; 3], a: Color, budget: &mut Budget) -> Result<bool, Timeout> {
        let need = self.lists.get(p[0]).len().saturating_sub(1);
        Ok(self.first_slot(p, a, budget)?.into_iter().all(|(_, s)| s.len() >= need))
    }

    /// L-colorings of `domain`, lexicographic by vertex id then color.
    pub fn colorings(&self, domain: &[Vertex]) -> Vec<PartialColoring> {
        oracle::extensions_over(self.emb, self.lists, &PartialColoring::empty(self.n()), domain)
    }

    /// The first L-coloring of `domain`, lexicographically.
    pub fn first_coloring(&self, domain: &[Vertex], budget: &mut Budget) -> Result<Option<PartialColoring>, Timeout> {
        match self.route {
            Route::Solver => {
                let mask = mask_of(domain);
                let mut colors = [0; 64];
                let flow = self.ctx.for_each(0, &mut colors, mask, budget, &mut |c, _| Ok(ControlFlow::Break(*c)))?;
                Ok(match flow {
                    ControlFlow::Break(c) => Some(PartialColoring::from_mask(self.n(), mask, &c)),
                    ControlFlow::Continue(()) => None,
                })
            }
            Route::Oracle => Ok(oracle::first_coloring(self.emb, self.lists, domain)),
        }
    }

    /// First element of End(H, P, G) in lexicographic order.
    pub fn end_first(
        &self,
        path: &[Vertex],
        h: &[Vertex],
        budget: &mut Budget,
    ) -> Result<Option<PartialColoring>, Timeout> {
        let ends = [path[0], *path.last().unwrap()];
        let domain_mask = mask_of(&ends) | mask_of(h);
        match self.route {
            Route::Solver => {
                let flow = end_walk(&self.ctx, path, mask_of(h), budget, &mut |c| ControlFlow::Break(*c))?;
                Ok(match flow {
                    ControlFlow::Break(c) => Some(PartialColoring::from_mask(self.n(), domain_mask, &c)),
                    ControlFlow::Continue(()) => None,
                })
            }
            Route::Oracle => {
                let domain: Vec<Vertex> = mask_iter(domain_mask).collect();
                Ok(self.colorings(&domain).into_iter().find(|phi| oracle::sufficient(self.emb, self.lists, phi, path)))
            }
        }
    }

    /// First element of Crown(P, G) in the enumeration order of the
    /// structure module.
    pub fn crown_first(&self, path: &[Vertex], budget: &mut Budget) -> Result<Option<PartialColoring>, Timeout> {
        match self.route {
            Route::Solver => {
                let n = self.n();
                let flow = crown_walk(self.emb, &self.ctx, path, budget, &mut |d, c| {
                    ControlFlow::Break(PartialColoring::from_mask(n, d, c))
                })?;
                Ok(match flow {
                    ControlFlow::Break(p) => Some(p),
                    ControlFlow::Continue(()) => None,
                })
            }
            Route::Oracle => {
                let mut found = None;
                let _ = self.crown_candidates(path, &mut |phi, defect| {
                    if defect.is_none() {
                        found = Some(phi.clone());
                        ControlFlow::Break(())
                    } else {
                        ControlFlow::Continue(())
                    }
                });
                Ok(found)
            }
        }
    }

    /// Walks every L-coloring of every admissible Crown domain with the
    /// oracle, reporting why each one is or is not in the Crown.
    pub fn crown_candidates(
        &self,
        path: &[Vertex],
        f: &mut dyn FnMut(&PartialColoring, Option<CrownReason>) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let (q, q2) = terminal_neighbors(path);
        let required: Vec<Vertex> = path.iter().copied().filter(|&v| v != q && v != q2).collect();
        let optional: Vec<Vertex> = mask_iter(self.emb.outer_mask() & !mask_of(path)).collect();
        for sub in 0u64..(1u64 << optional.len()) {
            let mut domain = required.clone();
            for (i, &v) in optional.iter().enumerate() {
                if sub >> i & 1 == 1 {
                    domain.push(v);
                }
            }
            domain.sort_unstable();
            for phi in self.colorings(&domain) {
                let reason = self.crown_reason(path, &phi);
                f(&phi, reason)?;
            }
        }
        ControlFlow::Continue(())
    }

    fn crown_reason(&self, path: &[Vertex], phi: &PartialColoring) -> Option<CrownReason> {
        let (q, q2) = terminal_neighbors(path);
        for x in [q, q2] {
            if reduced_list(self.emb, self.lists, phi, x).len() + 2 < self.lists.get(x).len() {
                return Some(CrownReason::Slack(x));
            }
        }
        oracle::extensions_over(self.emb, self.lists, phi, path)
            .into_iter()
            .find(|psi| !oracle::extends(self.emb, self.lists, psi))
            .map(CrownReason::Fails)
    }
}

/// Why a candidate partial coloring is not in the Crown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum CrownReason {
    Slack(Vertex),
    Fails(PartialColoring),
}
