//! AP positions and large-scale gains of the configured layout.

use cfsr_core::channel::{build_topology, large_scale, SystemConfig};

use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct ApRow {
    pub ap: usize,
    pub x: f64,
    pub y: f64,
    pub dist_bd: f64,
    pub dist_rx: f64,
    pub b: f64,
    pub zeta: f64,
    pub eps: f64,
}

pub fn topology_rows(system: &SystemConfig) -> Result<Vec<ApRow>> {
    let topo = build_topology(system)?;
    let ls = large_scale(system, &topo)?;
    Ok((0..system.num_aps)
        .map(|m| ApRow {
            ap: m,
            x: topo.ap_positions[m].x,
            y: topo.ap_positions[m].y,
            dist_bd: topo.dist_ap_bd[m],
            dist_rx: topo.dist_ap_rx[m],
            b: ls.b[m],
            zeta: ls.zeta[m],
            eps: ls.eps[m],
        })
        .collect())
}
