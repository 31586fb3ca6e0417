//! Three-tier k-ary fat-tree with up/down routing and link failure state.
//!
//! Node numbering: hosts first, then ToRs, then aggregation switches, then
//! cores. Pod `p` owns ToRs and aggs `p*k/2 .. (p+1)*k/2`. Aggregation switch
//! `j` of every pod connects to cores `j*k/2 .. (j+1)*k/2`.

use rand::seq::index::sample;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

use crate::rng::{RngStream, StreamId};
use crate::time::{Bandwidth, SimTime};

pub type NodeId = u32;
pub type LinkId = u32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("fat-tree radix must be even and >= 4, got {0}")]
    BadRadix(usize),
    #[error("{failed} failed links per pod exceeds the {available} pod-to-core links")]
    TooManyFailures { failed: usize, available: usize },
    #[error("fraction of bandwidth lost must lie in [0, 1), got {0}")]
    BadFraction(f64),
    #[error("flaky failure parameter out of range: {0}")]
    BadFlaky(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Host,
    Tor,
    Agg,
    Core,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    HostTor,
    TorAgg,
    AggCore,
}

#[derive(Debug, Clone)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub tier: Tier,
    /// True when the link points away from the hosts.
    pub upward: bool,
    pub latency: SimTime,
    pub nominal: Bandwidth,
    /// Rate after static degradation.
    pub rate: Bandwidth,
    pub reverse: LinkId,
}

/// Where a packet at some node must go next on its way to a host.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hop<'a> {
    Fixed(LinkId),
    /// Equal-cost upward choices; the load balancer picks one.
    Choice(&'a [LinkId]),
}

#[derive(Debug, Clone)]
pub struct FatTree {
    k: usize,
    kinds: Vec<NodeKind>,
    links: Vec<Link>,
    up: Vec<Vec<LinkId>>,
    down: Vec<Vec<LinkId>>,
}

impl FatTree {
    pub fn build(
        k: usize,
        rate: Bandwidth,
        latency: SimTime,
    ) -> Result<FatTree, TopologyError> {
        if k < 4 || k % 2 != 0 {
            return Err(TopologyError::BadRadix(k));
        }
        let half = k / 2;
        let n_hosts = k * k * k / 4;
        let n_tors = k * half;
        let n_aggs = k * half;
        let n_cores = half * half;
        let total = n_hosts + n_tors + n_aggs + n_cores;

        let mut ft = FatTree {
            k,
            kinds: Vec::with_capacity(total),
            links: Vec::new(),
            up: vec![Vec::new(); total],
            down: vec![Vec::new(); total],
        };
        ft.kinds.extend(std::iter::repeat_n(NodeKind::Host, n_hosts));
        ft.kinds.extend(std::iter::repeat_n(NodeKind::Tor, n_tors));
        ft.kinds.extend(std::iter::repeat_n(NodeKind::Agg, n_aggs));
        ft.kinds.extend(std::iter::repeat_n(NodeKind::Core, n_cores));

        for h in 0..n_hosts {
            let tor = ft.tor_node(h / half);
            ft.connect(h as NodeId, tor, Tier::HostTor, rate, latency);
        }
        for pod in 0..k {
            for t in 0..half {
                for a in 0..half {
                    let tor = ft.tor_node(pod * half + t);
                    let agg = ft.agg_node(pod * half + a);
                    ft.connect(tor, agg, Tier::TorAgg, rate, latency);
                }
            }
        }
        // Core downlinks must be indexed by pod, so iterate pods innermost.
        for a in 0..half {
            for c in 0..half {
                for pod in 0..k {
                    let agg = ft.agg_node(pod * half + a);
                    let core = ft.core_node(a * half + c);
                    ft.connect(agg, core, Tier::AggCore, rate, latency);
                }
            }
        }
        Ok(ft)
    }

    fn connect(
        &mut self,
        lower: NodeId,
        upper: NodeId,
        tier: Tier,
        rate: Bandwidth,
        latency: SimTime,
    ) {
        let up_id = self.links.len() as LinkId;
        let down_id = up_id + 1;
        self.links.push(Link {
            from: lower,
            to: upper,
            tier,
            upward: true,
            latency,
            nominal: rate,
            rate,
            reverse: down_id,
        });
        self.links.push(Link {
            from: upper,
            to: lower,
            tier,
            upward: false,
            latency,
            nominal: rate,
            rate,
            reverse: up_id,
        });
        self.up[lower as usize].push(up_id);
        self.down[upper as usize].push(down_id);
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn half(&self) -> usize {
        self.k / 2
    }

    pub fn n_hosts(&self) -> usize {
        self.k * self.k * self.k / 4
    }

    pub fn n_tors(&self) -> usize {
        self.k * self.half()
    }

    pub fn n_aggs(&self) -> usize {
        self.k * self.half()
    }

    pub fn n_cores(&self) -> usize {
        self.half() * self.half()
    }

    pub fn n_pods(&self) -> usize {
        self.k
    }

    pub fn n_nodes(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, node: NodeId) -> NodeKind {
        self.kinds[node as usize]
    }

    pub fn tor_node(&self, tor: usize) -> NodeId {
        (self.n_hosts() + tor) as NodeId
    }

    pub fn agg_node(&self, agg: usize) -> NodeId {
        (self.n_hosts() + self.n_tors() + agg) as NodeId
    }

    pub fn core_node(&self, core: usize) -> NodeId {
        (self.n_hosts() + self.n_tors() + self.n_aggs() + core) as NodeId
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id as usize]
    }

    pub fn uplinks(&self, node: NodeId) -> &[LinkId] {
        &self.up[node as usize]
    }

    pub fn downlinks(&self, node: NodeId) -> &[LinkId] {
        &self.down[node as usize]
    }

    /// The single link from a host to its ToR.
    pub fn host_uplink(&self, host: NodeId) -> LinkId {
        self.up[host as usize][0]
    }

    pub fn host_pod(&self, host: NodeId) -> usize {
        host as usize / (self.half() * self.half())
    }

    fn host_tor_index(&self, host: NodeId) -> usize {
        host as usize / self.half()
    }

    /// Pod of a ToR or aggregation switch.
    fn switch_pod(&self, node: NodeId) -> usize {
        let base = match self.kind(node) {
            NodeKind::Tor => self.n_hosts(),
            NodeKind::Agg => self.n_hosts() + self.n_tors(),
            _ => unreachable!("not a pod switch"),
        };
        (node as usize - base) / self.half()
    }

    /// Next hop at `node` for a packet addressed to host `dst`.
    pub fn next_hop(&self, node: NodeId, dst: NodeId) -> Hop<'_> {
        let half = self.half();
        let n = node as usize;
        match self.kind(node) {
            NodeKind::Host => Hop::Fixed(self.up[n][0]),
            NodeKind::Tor => {
                let tor = n - self.n_hosts();
                if self.host_tor_index(dst) == tor {
                    Hop::Fixed(self.down[n][dst as usize % half])
                } else {
                    Hop::Choice(&self.up[n])
                }
            }
            NodeKind::Agg => {
                if self.host_pod(dst) == self.switch_pod(node) {
                    Hop::Fixed(self.down[n][self.host_tor_index(dst) % half])
                } else {
                    Hop::Choice(&self.up[n])
                }
            }
            NodeKind::Core => Hop::Fixed(self.down[n][self.host_pod(dst)]),
        }
    }

    /// Upward agg-to-core links leaving `pod`, in a stable order.
    pub fn pod_core_uplinks(&self, pod: usize) -> Vec<LinkId> {
        let half = self.half();
        (0..half)
            .flat_map(|a| self.up[self.agg_node(pod * half + a) as usize].iter().copied())
            .collect()
    }

    /// Degrades `links_per_pod` distinct pod-to-core links in every pod (both
    /// directions) to `1 - frac_lost` of their nominal rate. Returns the
    /// affected upward link ids.
    pub fn apply_static_failures(
        &mut self,
        links_per_pod: usize,
        frac_lost: f64,
        rng: &mut RngStream,
    ) -> Result<Vec<LinkId>, TopologyError> {
        if !(0.0..1.0).contains(&frac_lost) {
            return Err(TopologyError::BadFraction(frac_lost));
        }
        let chosen = self.choose_failed_links(links_per_pod, rng)?;
        for &up in &chosen {
            let down = self.links[up as usize].reverse;
            for id in [up, down] {
                let l = &mut self.links[id as usize];
                l.rate = l.nominal.scaled(1.0 - frac_lost);
            }
        }
        Ok(chosen)
    }

    /// Uniformly picks `links_per_pod` distinct pod-to-core uplinks per pod.
    pub fn choose_failed_links(
        &self,
        links_per_pod: usize,
        rng: &mut RngStream,
    ) -> Result<Vec<LinkId>, TopologyError> {
        let available = self.half() * self.half();
        if links_per_pod > available {
            return Err(TopologyError::TooManyFailures {
                failed: links_per_pod,
                available,
            });
        }
        let mut chosen = Vec::with_capacity(links_per_pod * self.k);
        for pod in 0..self.k {
            let candidates = self.pod_core_uplinks(pod);
            let mut picks: Vec<usize> = sample(rng, available, links_per_pod).into_vec();
            picks.sort_unstable();
            chosen.extend(picks.into_iter().map(|i| candidates[i]));
        }
        Ok(chosen)
    }
}

/// Closed interval of wire loss `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Burst {
    pub start: SimTime,
    pub end: SimTime,
}

/// Poisson burst arrivals with exponential durations. Overlapping bursts
/// merge into one.
#[derive(Debug, Clone)]
pub struct BurstGenerator {
    rng: RngStream,
    arrivals: Option<Exp<f64>>,
    durations: Option<Exp<f64>>,
    next_arrival: f64,
}

impl BurstGenerator {
    /// Means are in microseconds; a zero duration mean yields no bursts.
    pub fn new(arrival_mean_us: f64, duration_mean_us: f64, mut rng: RngStream) -> Self {
        let arrivals = (arrival_mean_us > 0.0 && duration_mean_us > 0.0)
            .then(|| Exp::new(1.0 / arrival_mean_us).expect("positive rate"));
        let durations = arrivals
            .is_some()
            .then(|| Exp::new(1.0 / duration_mean_us).expect("positive rate"));
        let next_arrival = match &arrivals {
            Some(a) => a.sample(&mut rng),
            None => f64::INFINITY,
        };
        BurstGenerator {
            rng,
            arrivals,
            durations,
            next_arrival,
        }
    }

    fn raw(&mut self) -> Option<(f64, f64)> {
        let (arr, dur) = (self.arrivals?, self.durations?);
        let start = self.next_arrival;
        let end = start + dur.sample(&mut self.rng);
        self.next_arrival = start + arr.sample(&mut self.rng);
        Some((start, end))
    }
}

impl Iterator for BurstGenerator {
    type Item = Burst;

    fn next(&mut self) -> Option<Burst> {
        let (start, mut end) = self.raw()?;
        while self.next_arrival <= end {
            let (_, e) = self.raw()?;
            end = end.max(e);
        }
        Some(Burst {
            start: SimTime::from_us_f64(start),
            end: SimTime::from_us_f64(end),
        })
    }
}

/// Answers "is this link dropping at time t" for nondecreasing t.
#[derive(Debug, Clone)]
pub struct FlakyLink {
    bursts: BurstGenerator,
    current: Option<Burst>,
    pub bursts_seen: u64,
}

impl FlakyLink {
    pub fn new(bursts: BurstGenerator) -> Self {
        let mut f = FlakyLink {
            bursts,
            current: None,
            bursts_seen: 0,
        };
        f.current = f.bursts.next();
        f
    }

    pub fn is_dropping(&mut self, now: SimTime) -> bool {
        while let Some(b) = self.current {
            if now < b.end {
                return now >= b.start;
            }
            self.current = self.bursts.next();
            self.bursts_seen += 1;
        }
        false
    }
}

/// A flaky-failure installation: the chosen links and one burst source per
/// physical link (shared by both directions).
#[derive(Debug, Clone)]
pub struct FlakyPlan {
    pub links: Vec<LinkId>,
    pub generators: Vec<BurstGenerator>,
}

impl FlakyPlan {
    pub fn new(
        ft: &FatTree,
        links_per_pod: usize,
        arrival_mean_us: f64,
        duration_mean_us: f64,
        seed: u64,
    ) -> Result<FlakyPlan, TopologyError> {
        if !(arrival_mean_us > 0.0) {
            return Err(TopologyError::BadFlaky("arrival mean must be positive"));
        }
        if !(duration_mean_us >= 0.0) {
            return Err(TopologyError::BadFlaky("duration mean must be >= 0"));
        }
        let mut rng = RngStream::new(seed, StreamId::Failures);
        let links = ft.choose_failed_links(links_per_pod, &mut rng)?;
        let generators = links
            .iter()
            .map(|&l| {
                BurstGenerator::new(
                    arrival_mean_us,
                    duration_mean_us,
                    RngStream::new(seed, StreamId::FlakyLink(l)),
                )
            })
            .collect();
        Ok(FlakyPlan { links, generators })
    }
}

/// Materializes the burst schedule of every flaky link up to `horizon`.
pub fn schedule_flaky_failures(
    ft: &FatTree,
    links_per_pod: usize,
    arrival_mean_us: f64,
    duration_mean_us: f64,
    seed: u64,
    horizon: SimTime,
) -> Result<Vec<(LinkId, Vec<Burst>)>, TopologyError> {
    if horizon == SimTime::ZERO {
        return Err(TopologyError::BadFlaky("horizon must be positive"));
    }
    let plan = FlakyPlan::new(ft, links_per_pod, arrival_mean_us, duration_mean_us, seed)?;
    Ok(plan
        .links
        .into_iter()
        .zip(plan.generators)
        .map(|(l, g)| (l, g.take_while(|b| b.start < horizon).collect()))
        .collect())
}

/// Whether pod-to-core capacity left after failures still carries an
/// all-to-all at host line rate under perfect balancing.
///
/// `frac_lost` is the fraction of bandwidth lost per failed link, so the pod
/// keeps `k²/4 - f·p` uplink-equivalents.
pub fn check_capacity(k: usize, failed_per_pod: usize, frac_lost: f64) -> bool {
    let k = k as f64;
    let hosts = k * k * k / 4.0;
    let pod_hosts = k * k / 4.0;
    let flows_on_host_link = hosts - 1.0;
    let flows_leaving_pod = pod_hosts * (hosts - pod_hosts);
    let uplink_equivalents = pod_hosts - failed_per_pod as f64 * frac_lost;
    if uplink_equivalents <= 0.0 {
        return false;
    }
    flows_on_host_link > flows_leaving_pod / uplink_equivalents
}
