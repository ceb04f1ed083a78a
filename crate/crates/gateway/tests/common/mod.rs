#![allow(dead_code)]

use rockcharge_fsm::Phase;
use rockcharge_gateway::{Command, CommandAck, CommandKind, EventBody, EventMsg, Service, ServiceConfig};
use rockcharge_sim::Scenario;

pub fn cmd(id: &str, kind: CommandKind) -> Command {
    Command { command_id: id.into(), issued_by: "test".into(), kind }
}

pub fn service(scenario: Scenario) -> Service {
    Service::new(ServiceConfig::new(scenario, rockcharge_mission::trees::build_mission_trees())).unwrap()
}

/// Records everything a service emits.
pub struct Session {
    pub service: Service,
    pub log: Vec<EventMsg>,
    n: usize,
}

impl Session {
    pub fn new(service: Service) -> Session {
        let mut s = Session { service, log: Vec::new(), n: 0 };
        s.flush();
        s
    }

    pub fn flush(&mut self) {
        self.log.extend(self.service.drain());
    }

    pub fn send(&mut self, kind: CommandKind) -> CommandAck {
        self.n += 1;
        let ack = self.service.apply(cmd(&format!("c{}", self.n), kind));
        self.flush();
        ack
    }

    pub fn tick(&mut self) {
        self.service.tick().unwrap();
        self.flush();
    }

    pub fn tick_until(&mut self, max: usize, done: impl Fn(&Service) -> bool) {
        for _ in 0..max {
            if done(&self.service) {
                return;
            }
            self.tick();
        }
        panic!("condition not reached in {max} ticks");
    }

    pub fn plan_ready(&mut self) {
        self.tick_until(3000, |s| s.orchestrator().phase() == Phase::ChargePlan && !s.orchestrator().tree_active());
    }

    pub fn phases(&self) -> Vec<Phase> {
        self.log
            .iter()
            .filter_map(|e| match e.body {
                EventBody::PhaseChanged { to, .. } => Some(to),
                _ => None,
            })
            .collect()
    }
}
