//! Distributed data-flow applications: modules, typed messages and the rules
//! that turn an incoming message into outgoing ones.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::distributions::{RandomStream, TemporalDistribution};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AppError {
    #[error("application '{app}': duplicate {what} '{name}'")]
    Duplicate {
        app: String,
        what: &'static str,
        name: String,
    },
    #[error("application '{app}': {context} references unknown {what} '{name}'")]
    Dangling {
        app: String,
        context: String,
        what: &'static str,
        name: String,
    },
    #[error("application '{app}': {reason}")]
    Invalid { app: String, reason: String },
    #[error("application '{app}': cycle through message '{message}'")]
    Cycle { app: String, message: String },
    #[error(
        "application '{app}': no transmission rule for message '{message}' at module '{module}'"
    )]
    Unroutable {
        app: String,
        module: String,
        message: String,
    },
}

impl AppError {
    fn invalid(app: &str, reason: impl Into<String>) -> Self {
        AppError::Invalid {
            app: app.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModuleKind {
    Source,
    Sink,
    Module,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppModule {
    pub name: String,
    pub kind: ModuleKind,
    pub ram: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MessageType {
    pub name: String,
    pub src: String,
    pub dst: String,
    pub instructions: f64,
    pub bytes: f64,
    pub broadcast: bool,
}

impl MessageType {
    pub fn new(
        name: impl Into<String>,
        src: impl Into<String>,
        dst: impl Into<String>,
        instructions: f64,
        bytes: f64,
    ) -> Self {
        MessageType {
            name: name.into(),
            src: src.into(),
            dst: dst.into(),
            instructions,
            bytes,
            broadcast: false,
        }
    }

    pub fn broadcast(mut self) -> Self {
        self.broadcast = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransmissionMode {
    /// Emit with probability `threshold`.
    Fractional(f64),
    /// Emit one copy per deployed replica of the destination module.
    Broadcast,
    /// Absorb; emit nothing.
    Sink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionRule {
    pub module: String,
    pub message_in: String,
    pub message_out: Option<String>,
    pub mode: TransmissionMode,
}

/// Periodic self-triggered emission by a compute module.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceSourceRule {
    pub module: String,
    pub message_out: String,
    pub distribution: TemporalDistribution,
}

/// One outgoing message decided by [`Application::transmissions_for`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transmission<'a> {
    pub message: &'a str,
    pub broadcast: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Application {
    pub name: String,
    pub modules: Vec<AppModule>,
    pub messages: BTreeMap<String, MessageType>,
    pub rules: Vec<TransmissionRule>,
    pub service_sources: Vec<ServiceSourceRule>,
}

impl Application {
    pub fn new(name: impl Into<String>) -> Self {
        Application {
            name: name.into(),
            modules: Vec::new(),
            messages: BTreeMap::new(),
            rules: Vec::new(),
            service_sources: Vec::new(),
        }
    }

    pub fn with_module(mut self, name: impl Into<String>, kind: ModuleKind) -> Self {
        self.modules.push(AppModule {
            name: name.into(),
            kind,
            ram: 0.0,
        });
        self
    }

    pub fn with_message(mut self, message: MessageType) -> Self {
        self.messages.insert(message.name.clone(), message);
        self
    }

    pub fn with_rule(
        mut self,
        module: impl Into<String>,
        message_in: impl Into<String>,
        message_out: Option<&str>,
        mode: TransmissionMode,
    ) -> Self {
        self.rules.push(TransmissionRule {
            module: module.into(),
            message_in: message_in.into(),
            message_out: message_out.map(str::to_string),
            mode,
        });
        self
    }

    pub fn with_service_source(
        mut self,
        module: impl Into<String>,
        message_out: impl Into<String>,
        distribution: TemporalDistribution,
    ) -> Self {
        self.service_sources.push(ServiceSourceRule {
            module: module.into(),
            message_out: message_out.into(),
            distribution,
        });
        self
    }

    pub fn module(&self, name: &str) -> Option<&AppModule> {
        self.modules.iter().find(|m| m.name == name)
    }

    pub fn message(&self, name: &str) -> Option<&MessageType> {
        self.messages.get(name)
    }

    /// Messages emitted by SOURCE-kind modules, i.e. injectable by workload
    /// generators.
    pub fn source_messages(&self) -> Vec<&str> {
        self.messages
            .values()
            .filter(|m| {
                self.module(&m.src)
                    .is_some_and(|s| s.kind == ModuleKind::Source)
            })
            .map(|m| m.name.as_str())
            .collect()
    }

    pub fn rules_for<'a>(
        &'a self,
        module: &'a str,
        message_in: &'a str,
    ) -> impl Iterator<Item = &'a TransmissionRule> + 'a {
        self.rules
            .iter()
            .filter(move |r| r.module == module && r.message_in == message_in)
    }

    pub fn validate(&self) -> Result<(), AppError> {
        let app = self.name.as_str();
        if app.is_empty() {
            return Err(AppError::invalid(app, "empty application name"));
        }
        let dangling = |context: String, what: &'static str, name: &str| AppError::Dangling {
            app: app.to_string(),
            context,
            what,
            name: name.to_string(),
        };

        let mut names = BTreeSet::new();
        for m in &self.modules {
            if !names.insert(m.name.as_str()) {
                return Err(AppError::Duplicate {
                    app: app.to_string(),
                    what: "module",
                    name: m.name.clone(),
                });
            }
            if !m.ram.is_finite() || m.ram < 0.0 {
                return Err(AppError::invalid(
                    app,
                    format!("module '{}': RAM must be >= 0", m.name),
                ));
            }
        }

        for (key, msg) in &self.messages {
            if key != &msg.name {
                return Err(AppError::invalid(
                    app,
                    format!("message key '{key}' != name '{}'", msg.name),
                ));
            }
            let ctx = || format!("message '{}'", msg.name);
            let src = self
                .module(&msg.src)
                .ok_or_else(|| dangling(ctx(), "module", &msg.src))?;
            let dst = self
                .module(&msg.dst)
                .ok_or_else(|| dangling(ctx(), "module", &msg.dst))?;
            if src.kind == ModuleKind::Sink {
                return Err(AppError::invalid(
                    app,
                    format!("{}: SINK module '{}' cannot emit", ctx(), src.name),
                ));
            }
            if dst.kind == ModuleKind::Source {
                return Err(AppError::invalid(
                    app,
                    format!("{}: SOURCE module '{}' cannot receive", ctx(), dst.name),
                ));
            }
            if !msg.bytes.is_finite() || msg.bytes <= 0.0 {
                return Err(AppError::invalid(
                    app,
                    format!("{}: bytes must be > 0", ctx()),
                ));
            }
            if !msg.instructions.is_finite() || msg.instructions < 0.0 {
                return Err(AppError::invalid(
                    app,
                    format!("{}: instructions must be >= 0", ctx()),
                ));
            }
        }

        for (i, rule) in self.rules.iter().enumerate() {
            let ctx = || format!("transmission[{i}] on '{}'", rule.module);
            let module = self
                .module(&rule.module)
                .ok_or_else(|| dangling(ctx(), "module", &rule.module))?;
            if module.kind != ModuleKind::Module {
                return Err(AppError::invalid(
                    app,
                    format!("{}: rules apply only to MODULE kinds", ctx()),
                ));
            }
            let m_in = self
                .message(&rule.message_in)
                .ok_or_else(|| dangling(ctx(), "message", &rule.message_in))?;
            if m_in.dst != rule.module {
                return Err(AppError::invalid(
                    app,
                    format!(
                        "{}: message '{}' is addressed to '{}'",
                        ctx(),
                        m_in.name,
                        m_in.dst
                    ),
                ));
            }
            match (&rule.message_out, rule.mode) {
                (None, TransmissionMode::Sink) => {}
                (None, _) => {
                    return Err(AppError::invalid(
                        app,
                        format!("{}: message_out required", ctx()),
                    ));
                }
                (Some(_), TransmissionMode::Sink) => {
                    return Err(AppError::invalid(
                        app,
                        format!("{}: SINK mode takes no message_out", ctx()),
                    ));
                }
                (Some(out), mode) => {
                    let m_out = self
                        .message(out)
                        .ok_or_else(|| dangling(ctx(), "message", out))?;
                    if m_out.src != rule.module {
                        return Err(AppError::invalid(
                            app,
                            format!("{}: message '{}' is sent by '{}'", ctx(), out, m_out.src),
                        ));
                    }
                    if m_out.src == m_out.dst {
                        return Err(AppError::Cycle {
                            app: app.to_string(),
                            message: out.clone(),
                        });
                    }
                    if let TransmissionMode::Fractional(p) = mode {
                        if !(0.0..=1.0).contains(&p) {
                            return Err(AppError::invalid(
                                app,
                                format!("{}: fractional threshold {p} outside [0, 1]", ctx()),
                            ));
                        }
                    }
                }
            }
        }

        for (i, ss) in self.service_sources.iter().enumerate() {
            let ctx = || format!("service_source[{i}] on '{}'", ss.module);
            let module = self
                .module(&ss.module)
                .ok_or_else(|| dangling(ctx(), "module", &ss.module))?;
            if module.kind != ModuleKind::Module {
                return Err(AppError::invalid(
                    app,
                    format!("{}: module must be MODULE kind", ctx()),
                ));
            }
            let m = self
                .message(&ss.message_out)
                .ok_or_else(|| dangling(ctx(), "message", &ss.message_out))?;
            if m.src != ss.module {
                return Err(AppError::invalid(
                    app,
                    format!("{}: message '{}' is sent by '{}'", ctx(), m.name, m.src),
                ));
            }
            ss.distribution
                .validate()
                .map_err(|e| AppError::invalid(app, format!("{}: {e}", ctx())))?;
        }

        // Every message delivered to a compute module must be handled.
        for msg in self.messages.values() {
            let to_module = self
                .module(&msg.dst)
                .is_some_and(|m| m.kind == ModuleKind::Module);
            if to_module && self.rules_for(&msg.dst, &msg.name).next().is_none() {
                return Err(AppError::Unroutable {
                    app: app.to_string(),
                    module: msg.dst.clone(),
                    message: msg.name.clone(),
                });
            }
        }

        self.check_acyclic()
    }

    /// Cycle check over the message transformation graph (`in -> out` per
    /// rule), by depth-first search with colouring.
    fn check_acyclic(&self) -> Result<(), AppError> {
        let mut edges: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for rule in &self.rules {
            if let Some(out) = &rule.message_out {
                edges
                    .entry(rule.message_in.as_str())
                    .or_default()
                    .push(out.as_str());
            }
        }
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Open,
            Done,
        }
        let mut marks: BTreeMap<&str, Mark> = BTreeMap::new();
        for start in self.messages.keys() {
            if marks.contains_key(start.as_str()) {
                continue;
            }
            let mut stack: Vec<(&str, usize)> = vec![(start.as_str(), 0)];
            marks.insert(start.as_str(), Mark::Open);
            while let Some((node, next)) = stack.pop() {
                let succ = edges.get(node).map(Vec::as_slice).unwrap_or(&[]);
                if next < succ.len() {
                    stack.push((node, next + 1));
                    let child = succ[next];
                    match marks.get(child) {
                        Some(Mark::Open) => {
                            return Err(AppError::Cycle {
                                app: self.name.clone(),
                                message: child.to_string(),
                            })
                        }
                        Some(Mark::Done) => {}
                        None => {
                            marks.insert(child, Mark::Open);
                            stack.push((child, 0));
                        }
                    }
                } else {
                    marks.insert(node, Mark::Done);
                }
            }
        }
        Ok(())
    }

    /// Outgoing messages for one message served at `module`.
    ///
    /// Every matching rule fires independently. Fractional rules take one
    /// uniform draw each and emit iff `u < threshold`.
    pub fn transmissions_for(
        &self,
        module: &str,
        message_in: &str,
        rng: &mut RandomStream,
    ) -> Result<Vec<Transmission<'_>>, AppError> {
        let mut out = Vec::new();
        let mut matched = false;
        for rule in self
            .rules
            .iter()
            .filter(|r| r.module == module && r.message_in == message_in)
        {
            matched = true;
            let Some(name) = rule.message_out.as_deref() else {
                continue;
            };
            let broadcast = self.message(name).is_some_and(|m| m.broadcast);
            match rule.mode {
                TransmissionMode::Sink => {}
                TransmissionMode::Broadcast => out.push(Transmission {
                    message: name,
                    broadcast: true,
                }),
                TransmissionMode::Fractional(p) => {
                    if rng.uniform() < p {
                        out.push(Transmission {
                            message: name,
                            broadcast,
                        });
                    }
                }
            }
        }
        if !matched {
            return Err(AppError::Unroutable {
                app: self.name.clone(),
                module: module.to_string(),
                message: message_in.to_string(),
            });
        }
        Ok(out)
    }

    pub fn to_document(&self) -> ApplicationDoc {
        ApplicationDoc {
            name: self.name.clone(),
            module: self
                .modules
                .iter()
                .map(|m| ModuleDoc {
                    name: m.name.clone(),
                    kind: m.kind,
                    ram: m.ram,
                })
                .collect(),
            message: self
                .messages
                .values()
                .map(|m| MessageDoc {
                    name: m.name.clone(),
                    s: m.src.clone(),
                    d: m.dst.clone(),
                    instructions: m.instructions,
                    bytes: m.bytes,
                    broadcast: m.broadcast,
                })
                .collect(),
            transmission: self
                .rules
                .iter()
                .map(|r| TransmissionDoc {
                    module: r.module.clone(),
                    message_in: r.message_in.clone(),
                    message_out: r.message_out.clone(),
                    fractional: match r.mode {
                        TransmissionMode::Fractional(p) => Some(p),
                        _ => None,
                    },
                })
                .collect(),
            service_source: self
                .service_sources
                .iter()
                .map(|s| ServiceSourceDoc {
                    module: s.module.clone(),
                    message_out: s.message_out.clone(),
                    distribution: s.distribution,
                })
                .collect(),
        }
    }
}

/// JSON application document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplicationDoc {
    pub name: String,
    #[serde(default)]
    pub module: Vec<ModuleDoc>,
    #[serde(default)]
    pub message: Vec<MessageDoc>,
    #[serde(default)]
    pub transmission: Vec<TransmissionDoc>,
    #[serde(default)]
    pub service_source: Vec<ServiceSourceDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleDoc {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: ModuleKind,
    #[serde(rename = "RAM", default)]
    pub ram: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MessageDoc {
    pub name: String,
    pub s: String,
    pub d: String,
    pub instructions: f64,
    pub bytes: f64,
    #[serde(default)]
    pub broadcast: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionDoc {
    pub module: String,
    pub message_in: String,
    #[serde(default)]
    pub message_out: Option<String>,
    #[serde(default)]
    pub fractional: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceSourceDoc {
    pub module: String,
    pub message_out: String,
    pub distribution: TemporalDistribution,
}

impl ApplicationDoc {
    /// Builds the application model. Name-level checks happen in
    /// [`Application::validate`].
    pub fn into_application(self) -> Result<Application, AppError> {
        let mut app = Application::new(self.name);
        app.modules = self
            .module
            .into_iter()
            .map(|m| AppModule {
                name: m.name,
                kind: m.kind,
                ram: m.ram,
            })
            .collect();
        for m in self.message {
            if app.messages.contains_key(&m.name) {
                return Err(AppError::Duplicate {
                    app: app.name.clone(),
                    what: "message",
                    name: m.name,
                });
            }
            app.messages.insert(
                m.name.clone(),
                MessageType {
                    name: m.name,
                    src: m.s,
                    dst: m.d,
                    instructions: m.instructions,
                    bytes: m.bytes,
                    broadcast: m.broadcast,
                },
            );
        }
        for t in self.transmission {
            let mode = match (&t.message_out, t.fractional) {
                (None, _) => TransmissionMode::Sink,
                (Some(_), Some(p)) => TransmissionMode::Fractional(p),
                (Some(out), None) => {
                    if app.messages.get(out).is_some_and(|m| m.broadcast) {
                        TransmissionMode::Broadcast
                    } else {
                        TransmissionMode::Fractional(1.0)
                    }
                }
            };
            app.rules.push(TransmissionRule {
                module: t.module,
                message_in: t.message_in,
                message_out: t.message_out,
                mode,
            });
        }
        app.service_sources = self
            .service_source
            .into_iter()
            .map(|s| ServiceSourceRule {
                module: s.module,
                message_out: s.message_out,
                distribution: s.distribution,
            })
            .collect();
        Ok(app)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn egg() -> Application {
        Application::new("EGG_GAME")
            .with_module("EGG", ModuleKind::Source)
            .with_module("Display", ModuleKind::Sink)
            .with_module("Client", ModuleKind::Module)
            .with_module("Calculator", ModuleKind::Module)
            .with_module("Coordinator", ModuleKind::Module)
            .with_message(MessageType::new("M.EGG", "EGG", "Client", 2000e6, 500.0))
            .with_message(MessageType::new(
                "M.Sensor",
                "Client",
                "Calculator",
                3500e6,
                500.0,
            ))
            .with_message(MessageType::new(
                "M.Player_Game_State",
                "Calculator",
                "Coordinator",
                1000e6,
                1000.0,
            ))
            .with_message(MessageType::new(
                "M.Concentration",
                "Calculator",
                "Client",
                14e6,
                500.0,
            ))
            .with_message(MessageType::new(
                "M.Global_Game_State",
                "Coordinator",
                "Client",
                28e6,
                1000.0,
            ))
            .with_message(MessageType::new(
                "M.Global_State_Update",
                "Client",
                "Display",
                1000e6,
                500.0,
            ))
            .with_message(MessageType::new(
                "M.Self_State_Update",
                "Client",
                "Display",
                1000e6,
                500.0,
            ))
            .with_rule(
                "Client",
                "M.EGG",
                Some("M.Sensor"),
                TransmissionMode::Fractional(0.9),
            )
            .with_rule(
                "Client",
                "M.Concentration",
                Some("M.Self_State_Update"),
                TransmissionMode::Fractional(1.0),
            )
            .with_rule(
                "Client",
                "M.Global_Game_State",
                Some("M.Global_State_Update"),
                TransmissionMode::Fractional(1.0),
            )
            .with_rule(
                "Calculator",
                "M.Sensor",
                Some("M.Concentration"),
                TransmissionMode::Fractional(1.0),
            )
            .with_rule(
                "Coordinator",
                "M.Player_Game_State",
                None,
                TransmissionMode::Sink,
            )
            .with_service_source(
                "Calculator",
                "M.Player_Game_State",
                TemporalDistribution::deterministic(100.0),
            )
    }

    #[test]
    fn egg_is_valid() {
        let app = egg();
        app.validate().unwrap();
        assert_eq!(app.source_messages(), vec!["M.EGG"]);
    }

    #[test]
    fn self_message_rule_is_a_cycle() {
        let app = Application::new("loop")
            .with_module("S", ModuleKind::Source)
            .with_module("Client", ModuleKind::Module)
            .with_message(MessageType::new("in", "S", "Client", 1.0, 1.0))
            .with_message(MessageType::new("self", "Client", "Client", 1.0, 1.0))
            .with_rule(
                "Client",
                "in",
                Some("self"),
                TransmissionMode::Fractional(1.0),
            )
            .with_rule("Client", "self", None, TransmissionMode::Sink);
        assert!(matches!(app.validate(), Err(AppError::Cycle { .. })));
    }

    #[test]
    fn message_level_cycle_rejected() {
        let app = Application::new("pingpong")
            .with_module("A", ModuleKind::Module)
            .with_module("B", ModuleKind::Module)
            .with_message(MessageType::new("ab", "A", "B", 1.0, 1.0))
            .with_message(MessageType::new("ba", "B", "A", 1.0, 1.0))
            .with_rule("B", "ab", Some("ba"), TransmissionMode::Fractional(1.0))
            .with_rule("A", "ba", Some("ab"), TransmissionMode::Fractional(1.0));
        assert!(matches!(app.validate(), Err(AppError::Cycle { .. })));
    }

    #[test]
    fn threshold_out_of_range() {
        let mut app = egg();
        app.rules[0].mode = TransmissionMode::Fractional(1.5);
        let err = app.validate().unwrap_err().to_string();
        assert!(err.contains("1.5"), "{err}");
    }

    #[test]
    fn dangling_names() {
        let mut app = egg();
        app.rules[0].message_out = Some("M.Nope".into());
        let err = app.validate().unwrap_err().to_string();
        assert!(err.contains("M.Nope"), "{err}");
    }

    #[test]
    fn missing_rule_for_module_message() {
        let mut app = egg();
        app.rules.retain(|r| r.message_in != "M.Sensor");
        assert!(matches!(app.validate(), Err(AppError::Unroutable { .. })));
    }

    #[test]
    fn fractional_draws() {
        let app = egg();
        let mut rng = RandomStream::new(3);
        let n = 10_000;
        let mut hits = 0;
        for _ in 0..n {
            hits += app
                .transmissions_for("Client", "M.EGG", &mut rng)
                .unwrap()
                .len();
        }
        let freq = hits as f64 / n as f64;
        assert!((0.88..=0.92).contains(&freq), "{freq}");

        for _ in 0..100 {
            let out = app
                .transmissions_for("Calculator", "M.Sensor", &mut rng)
                .unwrap();
            assert_eq!(
                out,
                vec![Transmission {
                    message: "M.Concentration",
                    broadcast: false
                }]
            );
        }
        assert!(app
            .transmissions_for("Coordinator", "M.Player_Game_State", &mut rng)
            .unwrap()
            .is_empty());
        assert!(app
            .transmissions_for("Calculator", "M.EGG", &mut rng)
            .is_err());
    }

    #[test]
    fn threshold_zero_never_emits() {
        let mut app = egg();
        app.rules[0].mode = TransmissionMode::Fractional(0.0);
        let mut rng = RandomStream::new(1);
        for _ in 0..1000 {
            assert!(app
                .transmissions_for("Client", "M.EGG", &mut rng)
                .unwrap()
                .is_empty());
        }
    }

    #[test]
    fn document_round_trip() {
        let app = egg();
        let text = serde_json::to_string(&app.to_document()).unwrap();
        let doc: ApplicationDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(doc.into_application().unwrap(), app);
    }

    #[test]
    fn document_transmission_modes() {
        let text = r#"{
            "name": "b",
            "module": [{"name": "S", "type": "SOURCE"}, {"name": "R", "type": "MODULE"},
                       {"name": "D", "type": "SINK"}],
            "message": [{"name": "m", "s": "S", "d": "R", "instructions": 1, "bytes": 1},
                        {"name": "out", "s": "R", "d": "D", "instructions": 0, "bytes": 1, "broadcast": true}],
            "transmission": [{"module": "R", "message_in": "m", "message_out": "out"}]
        }"#;
        let app = serde_json::from_str::<ApplicationDoc>(text)
            .unwrap()
            .into_application()
            .unwrap();
        app.validate().unwrap();
        assert_eq!(app.rules[0].mode, TransmissionMode::Broadcast);
    }
}
