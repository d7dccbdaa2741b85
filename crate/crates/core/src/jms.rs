//! Continuous-time primal-dual facility location with penalties and client
//! multiplicities.
//!
//! Every active client's budget grows with the global clock. A client offers
//! `m_j [α_j - d_ij]⁺` to each facility while unconnected, and the saving
//! `m_j [d_i'j - d_ij]⁺` once connected to `i'`. A facility opens when the
//! offers reach its cost; a client stops growing when it reaches an open
//! facility or its penalty. The run is simulated event by event, solving each
//! piecewise-linear crossing in closed form.

use serde::Serialize;
use thiserror::Error;

use crate::instances::{FlSolution, FlpmInstance, InstanceError, DEFAULT_TOL};

#[derive(Debug, Error)]
pub enum JmsError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("event cap of {0} exceeded")]
    EventCap(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JmsConfig {
    pub tol: f64,
    pub trace: bool,
}

impl Default for JmsConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            trace: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClientStatus {
    Active,
    Connected(usize),
    /// Budget reached the penalty before any open facility was in reach.
    Exhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Event {
    FacilityOpens { facility: usize },
    ClientConnects { client: usize, facility: usize },
    PotentialRunsOut { client: usize },
}

impl Event {
    /// Processing order among events due at the same instant.
    fn priority(&self) -> (u8, usize, usize) {
        match *self {
            Event::FacilityOpens { facility } => (0, facility, 0),
            Event::ClientConnects { client, facility } => (1, client, facility),
            Event::PotentialRunsOut { client } => (2, client, 0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimedEvent {
    pub time: f64,
    pub event: Event,
}

/// One processed event. For openings, `collected` is the total offer the
/// facility received and `connected` the clients (re-)connected to it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub time: f64,
    pub event: Event,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collected: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub connected: Vec<usize>,
}

impl TraceEntry {
    /// JSON line `{"t", "kind", "client"?, "facility"?, ...}` using instance ids.
    pub fn to_json_line(&self, inst: &FlpmInstance) -> String {
        let mut obj = serde_json::Map::new();
        obj.insert("t".into(), self.time.into());
        let (kind, client, facility) = match self.event {
            Event::FacilityOpens { facility } => ("facility-opens", None, Some(facility)),
            Event::ClientConnects { client, facility } => {
                ("client-connects", Some(client), Some(facility))
            }
            Event::PotentialRunsOut { client } => ("potential-runs-out", Some(client), None),
        };
        obj.insert("kind".into(), kind.into());
        if let Some(j) = client {
            obj.insert("client".into(), inst.clients[j].id.into());
        }
        if let Some(i) = facility {
            obj.insert("facility".into(), inst.facilities[i].id.into());
        }
        if let Some(c) = self.collected {
            obj.insert("collected".into(), c.into());
        }
        if !self.connected.is_empty() {
            let ids: Vec<u32> = self.connected.iter().map(|&j| inst.clients[j].id).collect();
            obj.insert("connected".into(), ids.into());
        }
        serde_json::Value::Object(obj).to_string()
    }
}

/// Simulation state of one run.
pub struct SimState<'a> {
    inst: &'a FlpmInstance,
    tol: f64,
    time: f64,
    status: Vec<ClientStatus>,
    budget: Vec<f64>,
    open_time: Vec<Option<f64>>,
    /// Offers from inactive clients to each unopened facility.
    passive: Vec<f64>,
    /// Clients sorted by distance, per facility.
    by_distance: Vec<Vec<usize>>,
}

impl<'a> SimState<'a> {
    pub fn new(inst: &'a FlpmInstance, tol: f64) -> Self {
        let by_distance = (0..inst.n_facilities())
            .map(|i| {
                let mut order: Vec<usize> = (0..inst.n_clients()).collect();
                order.sort_by(|&a, &b| inst.dist[a][i].total_cmp(&inst.dist[b][i]).then(a.cmp(&b)));
                order
            })
            .collect();
        Self {
            inst,
            tol,
            time: 0.0,
            status: vec![ClientStatus::Active; inst.n_clients()],
            budget: vec![0.0; inst.n_clients()],
            open_time: vec![None; inst.n_facilities()],
            passive: vec![0.0; inst.n_facilities()],
            by_distance,
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn status(&self, j: usize) -> ClientStatus {
        self.status[j]
    }

    /// Current budget; an active client's budget is the global time.
    pub fn budget(&self, j: usize) -> f64 {
        match self.status[j] {
            ClientStatus::Active => self.time,
            _ => self.budget[j],
        }
    }

    pub fn is_open(&self, i: usize) -> bool {
        self.open_time[i].is_some()
    }

    pub fn open_times(&self) -> &[Option<f64>] {
        &self.open_time
    }

    pub fn any_active(&self) -> bool {
        self.status.contains(&ClientStatus::Active)
    }

    /// What client `j` currently offers towards facility `i`.
    pub fn offer(&self, j: usize, i: usize) -> f64 {
        let c = &self.inst.clients[j];
        let d = self.inst.dist[j][i];
        let amount = match self.status[j] {
            ClientStatus::Active => self.time - d,
            ClientStatus::Exhausted => c.penalty - d,
            ClientStatus::Connected(k) => self.inst.dist[j][k] - d,
        };
        c.multiplicity * amount.max(0.0)
    }

    /// Offer of an inactive client, which does not change with time.
    fn passive_offer(&self, j: usize, status: ClientStatus, i: usize) -> f64 {
        let c = &self.inst.clients[j];
        let d = self.inst.dist[j][i];
        let amount = match status {
            ClientStatus::Active => return 0.0,
            ClientStatus::Exhausted => c.penalty - d,
            ClientStatus::Connected(k) => self.inst.dist[j][k] - d,
        };
        c.multiplicity * amount.max(0.0)
    }

    fn set_status(&mut self, j: usize, status: ClientStatus) {
        let old = self.status[j];
        for i in 0..self.inst.n_facilities() {
            if self.open_time[i].is_none() {
                self.passive[i] += self.passive_offer(j, status, i) - self.passive_offer(j, old, i);
            }
        }
        self.status[j] = status;
    }

    /// Total offer facility `i` has collected at the current time.
    pub fn collected(&self, i: usize) -> f64 {
        self.passive[i]
            + self.by_distance[i]
                .iter()
                .filter(|&&j| self.status[j] == ClientStatus::Active)
                .map(|&j| self.offer(j, i))
                .sum::<f64>()
    }

    /// Earliest time `>= now` at which unopened facility `i` is fully paid,
    /// or `None` if the current active set can never pay for it.
    fn opening_time(&self, i: usize) -> Option<f64> {
        let f = self.inst.facilities[i].opening_cost;
        if self.collected(i) >= f - self.tol {
            return Some(self.time);
        }
        let need = f - self.passive[i];
        // Active offers total Σ_{d_j <= t} m_j (t - d_j): linear between
        // consecutive distances.
        let (mut slope, mut intercept) = (0.0, 0.0);
        for &j in &self.by_distance[i] {
            if self.status[j] != ClientStatus::Active {
                continue;
            }
            let d = self.inst.dist[j][i];
            if slope > 0.0 {
                let cross = (need + intercept) / slope;
                if cross <= d {
                    return Some(cross.max(self.time));
                }
            }
            let m = self.inst.clients[j].multiplicity;
            slope += m;
            intercept += m * d;
        }
        (slope > 0.0).then(|| ((need + intercept) / slope).max(self.time))
    }

    /// The next event to process under the tie policy: among everything due
    /// within `tol` of the earliest time, openings first (by facility), then
    /// connections (by client, facility), then exhaustions (by client).
    pub fn next_event(&self) -> Option<TimedEvent> {
        let mut candidates: Vec<TimedEvent> = Vec::new();
        for i in 0..self.inst.n_facilities() {
            if self.open_time[i].is_none() {
                if let Some(time) = self.opening_time(i) {
                    candidates.push(TimedEvent {
                        time,
                        event: Event::FacilityOpens { facility: i },
                    });
                }
            }
        }
        for (j, c) in self.inst.clients.iter().enumerate() {
            if self.status[j] != ClientStatus::Active {
                continue;
            }
            for i in 0..self.inst.n_facilities() {
                if self.open_time[i].is_some() {
                    candidates.push(TimedEvent {
                        time: self.inst.dist[j][i].max(self.time),
                        event: Event::ClientConnects { client: j, facility: i },
                    });
                }
            }
            if c.penalty.is_finite() {
                candidates.push(TimedEvent {
                    time: c.penalty.max(self.time),
                    event: Event::PotentialRunsOut { client: j },
                });
            }
        }
        let earliest = candidates.iter().map(|e| e.time).fold(f64::INFINITY, f64::min);
        candidates
            .into_iter()
            .filter(|e| e.time <= earliest + self.tol)
            .min_by_key(|e| e.event.priority())
    }

    /// Advances the clock to the event and applies it.
    pub fn apply(&mut self, ev: TimedEvent) -> TraceEntry {
        self.time = self.time.max(ev.time);
        let t = self.time;
        let mut entry = TraceEntry {
            time: t,
            event: ev.event,
            collected: None,
            connected: Vec::new(),
        };
        match ev.event {
            Event::FacilityOpens { facility: i } => {
                entry.collected = Some(self.collected(i));
                self.open_time[i] = Some(t);
                let joining: Vec<usize> = (0..self.inst.n_clients())
                    .filter(|&j| self.offer(j, i) > 0.0)
                    .collect();
                for &j in &joining {
                    if self.status[j] == ClientStatus::Active {
                        self.budget[j] = t;
                    }
                    self.set_status(j, ClientStatus::Connected(i));
                }
                entry.connected = joining;
            }
            Event::ClientConnects { client: j, facility: i } => {
                self.budget[j] = t;
                self.set_status(j, ClientStatus::Connected(i));
            }
            Event::PotentialRunsOut { client: j } => {
                self.budget[j] = self.inst.clients[j].penalty;
                self.set_status(j, ClientStatus::Exhausted);
            }
        }
        entry
    }
}

/// Result of a run: the solution plus the final budgets and, on request,
/// the processed events.
#[derive(Clone, Debug, Serialize)]
pub struct JmsRun {
    pub solution: FlSolution,
    pub budgets: Vec<f64>,
    /// `Σ_j m_j α_j`; equals the solution cost.
    pub budget_total: f64,
    pub open_times: Vec<Option<f64>>,
    pub trace: Option<Vec<TraceEntry>>,
}

pub fn solve_flpm(inst: &FlpmInstance, cfg: &JmsConfig) -> Result<JmsRun, JmsError> {
    inst.validate()?;
    let mut state = SimState::new(inst, cfg.tol);
    let n = inst.n_clients() + inst.n_facilities();
    let cap = n * n;
    let mut trace = cfg.trace.then(Vec::new);
    let mut processed = 0;
    while state.any_active() {
        let ev = state
            .next_event()
            .expect("every active client eventually connects or exhausts");
        processed += 1;
        if processed > cap {
            return Err(JmsError::EventCap(cap));
        }
        let entry = state.apply(ev);
        if let Some(trace) = trace.as_mut() {
            trace.push(entry);
        }
    }
    let open: Vec<usize> = (0..inst.n_facilities()).filter(|&i| state.is_open(i)).collect();
    let budgets: Vec<f64> = (0..inst.n_clients()).map(|j| state.budget(j)).collect();
    let budget_total = inst
        .clients
        .iter()
        .zip(&budgets)
        .map(|(c, a)| c.multiplicity * a)
        .sum();
    Ok(JmsRun {
        solution: FlSolution::from_open(inst, &open),
        budgets,
        budget_total,
        open_times: state.open_time.clone(),
        trace,
    })
}
