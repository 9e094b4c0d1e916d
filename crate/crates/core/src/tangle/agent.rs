//! Agent-based Tangle: every transaction is an explicit site.
//!
//! A created transaction immediately picks two tips uniformly at random with
//! replacement from the whole tip set, redrawing until both share a type.
//! The selected tips stay selectable while the approval is pending; after
//! the delay `h` the new site is attached, its parents stop being tips and
//! the site itself becomes a tip.

use std::collections::VecDeque;

use super::{uniform_index, TipDynamics, TypeCounts};
use crate::error::{invalid, Error, Result};
use crate::rng::SimRng;

pub type SiteId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteKind {
    Genesis,
    Regular,
    /// First site of a conflicting sub-DAG, force-attached to honest history.
    ConflictSeed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub id: SiteId,
    pub created_at: f64,
    pub attached_at: f64,
    /// `None` only for genesis. Both entries may name the same tip.
    pub parents: Option<[SiteId; 2]>,
    pub type_index: usize,
    pub kind: SiteKind,
}

const NOT_A_TIP: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct AgentTangle {
    h: f64,
    sites: Vec<Site>,
    attached: Vec<bool>,
    /// Attached children of each site.
    children: Vec<Vec<SiteId>>,
    /// Per-type tip lists; `tip_pos[id]` indexes into the owning list.
    tips: Vec<Vec<SiteId>>,
    tip_pos: Vec<usize>,
    /// Selections by not-yet-attached transactions.
    selectors: Vec<u32>,
    created: Vec<u64>,
    pending: Vec<u64>,
    attached_count: Vec<u64>,
    /// Attached sites per type that have at least one attached child.
    approved: Vec<Vec<SiteId>>,
    checks: bool,
}

impl AgentTangle {
    /// Genesis-only ledger with `types` possible types and approval delay `h`.
    pub fn new(types: usize, h: f64) -> Result<Self> {
        if types < 1 {
            return Err(invalid("type count must be at least 1"));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(invalid("delay h must be positive"));
        }
        let genesis = Site {
            id: 0,
            created_at: 0.0,
            attached_at: 0.0,
            parents: None,
            type_index: 0,
            kind: SiteKind::Genesis,
        };
        let mut tips = vec![Vec::new(); types];
        tips[0].push(0);
        let mut created = vec![0; types];
        created[0] = 1;
        let mut attached_count = vec![0; types];
        attached_count[0] = 1;
        Ok(Self {
            h,
            sites: vec![genesis],
            attached: vec![true],
            children: vec![Vec::new()],
            tips,
            tip_pos: vec![0],
            selectors: vec![0],
            created,
            pending: vec![0; types],
            attached_count,
            approved: vec![Vec::new(); types],
            checks: true,
        })
    }

    /// Disable the per-event invariant checks (they are on by default).
    pub fn with_checks(mut self, on: bool) -> Self {
        self.checks = on;
        self
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, id: SiteId) -> Result<&Site> {
        self.sites.get(id).ok_or(Error::UnknownSite(id))
    }

    pub fn is_attached(&self, id: SiteId) -> bool {
        self.attached.get(id).copied().unwrap_or(false)
    }

    pub fn is_tip(&self, id: SiteId) -> bool {
        self.tip_pos.get(id).is_some_and(|&p| p != NOT_A_TIP)
    }

    pub fn is_pending(&self, id: SiteId) -> bool {
        self.is_tip(id) && self.selectors[id] > 0
    }

    pub fn tips_of(&self, type_index: usize) -> &[SiteId] {
        &self.tips[type_index]
    }

    pub fn type_count(&self) -> usize {
        self.tips.len()
    }

    /// Number of attached edges.
    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    pub fn counts(&self) -> Vec<TypeCounts> {
        (0..self.type_count())
            .map(|i| {
                let l = self.tips[i].len() as u64;
                let w = self.pending[i];
                TypeCounts {
                    n: self.created[i],
                    l,
                    w,
                    x: l - w,
                }
            })
            .collect()
    }

    fn push_tip(&mut self, id: SiteId) {
        let list = &mut self.tips[self.sites[id].type_index];
        self.tip_pos[id] = list.len();
        list.push(id);
    }

    fn remove_tip(&mut self, id: SiteId) {
        let ty = self.sites[id].type_index;
        let pos = self.tip_pos[id];
        let list = &mut self.tips[ty];
        list.swap_remove(pos);
        if let Some(&moved) = list.get(pos) {
            self.tip_pos[moved] = pos;
        }
        self.tip_pos[id] = NOT_A_TIP;
    }

    fn add_site(&mut self, site: Site) -> SiteId {
        let id = site.id;
        self.sites.push(site);
        self.attached.push(false);
        self.children.push(Vec::new());
        self.tip_pos.push(NOT_A_TIP);
        self.selectors.push(0);
        id
    }

    fn select_pair(&self, forced: Option<usize>, rng: &mut SimRng) -> Result<(usize, [SiteId; 2])> {
        if let Some(ty) = forced {
            let list = self.tips.get(ty).ok_or_else(|| invalid(format!("type {ty} out of range")))?;
            if list.is_empty() {
                return Err(Error::LedgerExtinct);
            }
            let n = list.len() as u64;
            let a = list[uniform_index(n, rng) as usize];
            let b = list[uniform_index(n, rng) as usize];
            return Ok((ty, [a, b]));
        }
        let total: u64 = self.tips.iter().map(|l| l.len() as u64).sum();
        if total == 0 {
            return Err(Error::LedgerExtinct);
        }
        loop {
            let (ta, a) = self.global_tip(uniform_index(total, rng));
            let (tb, b) = self.global_tip(uniform_index(total, rng));
            if ta == tb {
                return Ok((ta, [a, b]));
            }
        }
    }

    fn global_tip(&self, mut k: u64) -> (usize, SiteId) {
        for (ty, list) in self.tips.iter().enumerate() {
            let n = list.len() as u64;
            if k < n {
                return (ty, list[k as usize]);
            }
            k -= n;
        }
        unreachable!("index below total tip count")
    }

    /// Create a transaction at `t` using random tip selection; the new site
    /// is scheduled to attach at `t + h`.
    pub fn create_transaction(&mut self, t: f64, rng: &mut SimRng) -> Result<SiteId> {
        self.create_inner(t, None, rng)
    }

    fn create_inner(&mut self, t: f64, forced: Option<usize>, rng: &mut SimRng) -> Result<SiteId> {
        let (ty, parents) = self.select_pair(forced, rng)?;
        for (k, &p) in parents.iter().enumerate() {
            if k == 1 && parents[1] == parents[0] {
                break;
            }
            if self.selectors[p] == 0 {
                self.pending[ty] += 1;
            }
            self.selectors[p] += 1;
        }
        self.created[ty] += 1;
        let id = self.sites.len();
        Ok(self.add_site(Site {
            id,
            created_at: t,
            attached_at: t + self.h,
            parents: Some(parents),
            type_index: ty,
            kind: SiteKind::Regular,
        }))
    }

    /// Attach site `id` at time `t`, which must equal its scheduled attach time.
    pub fn attach(&mut self, t: f64, id: SiteId) -> Result<()> {
        let site = self.site(id)?.clone();
        if self.attached[id] {
            return Err(Error::Invariant(format!("site {id} attached twice")));
        }
        if t != site.attached_at {
            return Err(Error::Invariant(format!(
                "site {id} attached at {t}, scheduled for {}",
                site.attached_at
            )));
        }
        let parents = site
            .parents
            .ok_or_else(|| Error::Invariant("genesis cannot be attached".into()))?;
        let distinct: &[SiteId] = if parents[0] == parents[1] {
            &parents[..1]
        } else {
            &parents[..]
        };
        for &p in distinct {
            let parent = &self.sites[p];
            if self.checks {
                if !(parent.attached_at < site.attached_at) || !self.attached[p] {
                    return Err(Error::Invariant(format!("edge {id} -> {p} breaks attach order")));
                }
                if parent.type_index != site.type_index {
                    return Err(Error::Invariant(format!("edge {id} -> {p} joins two types")));
                }
            }
            self.selectors[p] -= 1;
            if self.is_tip(p) {
                self.remove_tip(p);
                self.pending[site.type_index] -= 1;
            }
            self.link_child(p, id);
        }
        self.attached[id] = true;
        self.attached_count[site.type_index] += 1;
        self.push_tip(id);
        if self.checks {
            self.check_conservation()?;
        }
        Ok(())
    }

    fn link_child(&mut self, parent: SiteId, child: SiteId) {
        if self.children[parent].is_empty() {
            self.approved[self.sites[parent].type_index].push(parent);
        }
        self.children[parent].push(child);
    }

    /// Force-attach the first site of `type_index` at `t`. Its parents are
    /// drawn from already approved (non-tip) honest sites, so the honest tip
    /// set is untouched; the seed becomes a free tip of the new type.
    pub fn seed_conflict(&mut self, t: f64, type_index: usize, rng: &mut SimRng) -> Result<SiteId> {
        if type_index == 0 || type_index >= self.type_count() {
            return Err(invalid(format!("conflict type {type_index} must be in 1..{}", self.type_count())));
        }
        let pool = &self.approved[0];
        if pool.is_empty() {
            return Err(invalid("no approved honest site to branch a conflict from"));
        }
        let n = pool.len() as u64;
        let parents = [pool[uniform_index(n, rng) as usize], pool[uniform_index(n, rng) as usize]];
        let id = self.sites.len();
        self.add_site(Site {
            id,
            created_at: t,
            attached_at: t,
            parents: Some(parents),
            type_index,
            kind: SiteKind::ConflictSeed,
        });
        for (k, &p) in parents.iter().enumerate() {
            if k == 1 && parents[1] == parents[0] {
                break;
            }
            self.children[p].push(id);
        }
        self.created[type_index] += 1;
        self.attached[id] = true;
        self.attached_count[type_index] += 1;
        self.push_tip(id);
        Ok(id)
    }

    /// Seed a conflict of `attack_type` at `t` and create `m - 1` further
    /// transactions of that type. Returns the ids of the created (pending)
    /// transactions; the caller attaches them at `t + h`.
    pub fn inject_attack(&mut self, t: f64, m: usize, attack_type: usize, rng: &mut SimRng) -> Result<Vec<SiteId>> {
        if m == 0 || !(t >= 0.0) {
            return Err(invalid("attack needs m >= 1 and t >= 0"));
        }
        self.seed_conflict(t, attack_type, rng)?;
        (1..m).map(|_| self.create_inner(t, Some(attack_type), rng)).collect()
    }

    /// One plus the number of distinct attached descendants of `id`.
    pub fn site_weight(&self, id: SiteId) -> Result<u64> {
        self.site(id)?;
        if !self.attached[id] {
            return Err(Error::Invariant(format!("site {id} is not attached")));
        }
        let mut seen = vec![false; self.sites.len()];
        let mut queue = VecDeque::from([id]);
        seen[id] = true;
        let mut count = 0u64;
        while let Some(s) = queue.pop_front() {
            count += 1;
            for &c in &self.children[s] {
                if !seen[c] {
                    seen[c] = true;
                    queue.push_back(c);
                }
            }
        }
        Ok(count)
    }

    /// Per type: tips = attached sites - attached sites with an attached child.
    pub fn check_conservation(&self) -> Result<()> {
        for ty in 0..self.type_count() {
            let expect = self.attached_count[ty] - self.approved[ty].len() as u64;
            if self.tips[ty].len() as u64 != expect {
                return Err(Error::Invariant(format!(
                    "type {ty}: {} tips, expected {expect}",
                    self.tips[ty].len()
                )));
            }
            let pending = self.tips[ty].iter().filter(|&&s| self.selectors[s] > 0).count() as u64;
            if pending != self.pending[ty] {
                return Err(Error::Invariant(format!("type {ty}: pending count drift")));
            }
        }
        Ok(())
    }

    /// Every non-genesis site reaches genesis through parent edges, and no
    /// honest edge joins two types.
    pub fn check_structure(&self) -> Result<()> {
        let mut reaches = vec![false; self.sites.len()];
        reaches[0] = true;
        // ids increase with creation; parents are always created earlier
        for s in &self.sites[1..] {
            let parents = s
                .parents
                .ok_or_else(|| Error::Invariant(format!("site {} has no parents", s.id)))?;
            for p in parents {
                if p >= s.id {
                    return Err(Error::Invariant(format!("site {} approves later site {p}", s.id)));
                }
                if s.kind == SiteKind::Regular && self.sites[p].type_index != s.type_index {
                    return Err(Error::Invariant(format!("site {} joins two types", s.id)));
                }
            }
            reaches[s.id] = parents.iter().all(|&p| reaches[p]);
            if !reaches[s.id] {
                return Err(Error::Invariant(format!("site {} is disconnected", s.id)));
            }
        }
        Ok(())
    }
}

impl TipDynamics for AgentTangle {
    type Pending = SiteId;

    fn type_count(&self) -> usize {
        self.tips.len()
    }

    fn create(&mut self, t: f64, forced: Option<usize>, rng: &mut SimRng) -> Result<SiteId> {
        self.create_inner(t, forced, rng)
    }

    fn attach(&mut self, t: f64, pending: SiteId) -> Result<()> {
        AgentTangle::attach(self, t, pending)
    }

    fn seed_conflict(&mut self, t: f64, type_index: usize, rng: &mut SimRng) -> Result<()> {
        AgentTangle::seed_conflict(self, t, type_index, rng).map(|_| ())
    }

    fn counts(&self) -> Vec<TypeCounts> {
        AgentTangle::counts(self)
    }
}

/// Run the agent model for `cfg` on the stream `rng`.
pub fn run(cfg: &super::TangleConfig, rng: &mut SimRng) -> Result<super::Trajectory> {
    let mut tangle = AgentTangle::new(cfg.types, cfg.h)?;
    super::simulate(&mut tangle, cfg, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seed_stream;

    #[test]
    fn new_tangle_is_genesis_only() {
        for d in [1, 2] {
            let t = AgentTangle::new(d, 3.0).unwrap();
            assert_eq!(t.sites().len(), 1);
            assert_eq!(t.tips_of(0), &[0]);
            assert_eq!(t.edge_count(), 0);
            assert_eq!(t.site_weight(0).unwrap(), 1);
            if d == 2 {
                assert!(t.tips_of(1).is_empty());
            }
        }
        assert!(AgentTangle::new(0, 3.0).is_err());
    }

    #[test]
    fn genesis_is_selected_twice() {
        let mut t = AgentTangle::new(1, 3.0).unwrap();
        let mut rng = seed_stream(1, 0);
        let id = t.create_transaction(0.0, &mut rng).unwrap();
        assert_eq!(t.site(id).unwrap().parents, Some([0, 0]));
        assert!(t.is_pending(0));
        assert_eq!(t.counts()[0].w, 1);
        t.attach(3.0, id).unwrap();
        assert_eq!(t.tips_of(0), &[id]);
        assert!(!t.is_tip(0));
        assert_eq!(t.site_weight(0).unwrap(), 2);
    }

    #[test]
    fn two_selectors_of_genesis_both_become_tips() {
        let mut t = AgentTangle::new(1, 3.0).unwrap();
        let mut rng = seed_stream(1, 0);
        let a = t.create_transaction(0.0, &mut rng).unwrap();
        let b = t.create_transaction(1.0, &mut rng).unwrap();
        t.attach(3.0, a).unwrap();
        t.attach(4.0, b).unwrap();
        assert_eq!(t.tips_of(0).len(), 2);
        assert_eq!(t.site_weight(0).unwrap(), 3);
    }

    #[test]
    fn early_attach_is_rejected() {
        let mut t = AgentTangle::new(1, 3.0).unwrap();
        let mut rng = seed_stream(1, 0);
        let a = t.create_transaction(0.0, &mut rng).unwrap();
        assert!(matches!(t.attach(2.0, a), Err(Error::Invariant(_))));
    }

    #[test]
    fn chain_weight_by_traversal() {
        // A <- B <- C, every approval doubled
        let mut t = AgentTangle::new(1, 1.0).unwrap();
        let mut rng = seed_stream(1, 0);
        let b = t.create_transaction(0.0, &mut rng).unwrap();
        t.attach(1.0, b).unwrap();
        let c = t.create_transaction(1.0, &mut rng).unwrap();
        assert_eq!(t.site(c).unwrap().parents, Some([b, b]));
        t.attach(2.0, c).unwrap();
        assert_eq!(t.site_weight(0).unwrap(), 3);
        assert_eq!(t.site_weight(b).unwrap(), 2);
        assert_eq!(t.site_weight(c).unwrap(), 1);
        assert!(matches!(t.site_weight(99), Err(Error::UnknownSite(99))));
    }

    #[test]
    fn weight_of_genesis_counts_every_attached_site() {
        let cfg = super::super::TangleConfig::new(10.0, 1.0, 1, 20.0);
        let mut t = AgentTangle::new(1, 1.0).unwrap();
        super::super::simulate(&mut t, &cfg, &mut seed_stream(9, 0)).unwrap();
        let attached = (0..t.sites().len()).filter(|&s| t.is_attached(s)).count() as u64;
        assert_eq!(t.site_weight(0).unwrap(), attached);
        for &tip in t.tips_of(0) {
            assert_eq!(t.site_weight(tip).unwrap(), 1);
        }
        t.check_structure().unwrap();
    }

    #[test]
    fn only_type_with_tips_is_chosen() {
        let mut t = AgentTangle::new(2, 1.0).unwrap();
        let mut rng = seed_stream(2, 0);
        let mut now = 0.0;
        for _ in 0..3 {
            let id = t.create_transaction(now, &mut rng).unwrap();
            now += 1.0;
            t.attach(now, id).unwrap();
        }
        for _ in 0..50 {
            let id = t.create_transaction(now, &mut rng).unwrap();
            assert_eq!(t.site(id).unwrap().type_index, 0);
        }
    }

    #[test]
    fn single_site_attack() {
        let mut t = AgentTangle::new(2, 1.0).unwrap();
        let mut rng = seed_stream(3, 0);
        let a = t.create_transaction(0.0, &mut rng).unwrap();
        t.attach(1.0, a).unwrap();
        assert!(t.inject_attack(1.5, 1, 0, &mut rng).is_err());
        let created = t.inject_attack(1.5, 1, 1, &mut rng).unwrap();
        assert!(created.is_empty());
        assert_eq!(t.tips_of(1).len(), 1);
        assert_eq!(t.tips_of(0), &[a]);
        t.check_structure().unwrap();
    }

    #[test]
    fn attack_burst_selects_own_type() {
        let mut t = AgentTangle::new(2, 1.0).unwrap();
        let mut rng = seed_stream(4, 0);
        let a = t.create_transaction(0.0, &mut rng).unwrap();
        t.attach(1.0, a).unwrap();
        let ids = t.inject_attack(2.0, 5, 1, &mut rng).unwrap();
        assert_eq!(ids.len(), 4);
        for &id in &ids {
            assert_eq!(t.site(id).unwrap().type_index, 1);
        }
        for &id in &ids {
            t.attach(3.0, id).unwrap();
        }
        assert_eq!(t.tips_of(1).len(), 4);
        t.check_conservation().unwrap();
    }
}
