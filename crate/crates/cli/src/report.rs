use serde_json::{json, Map, Value};

/// One scenario's output: a JSON header line followed by a CSV table.
#[derive(Debug, Clone)]
pub struct Report {
    pub scenario: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub failures: Vec<String>,
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn new(scenario: &'static str, columns: &[&'static str]) -> Self {
        Self {
            scenario,
            columns: columns.to_vec(),
            rows: Vec::new(),
            failures: Vec::new(),
            summary: Map::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn fail(&mut self, what: impl Into<String>) {
        self.failures.push(what.into());
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn render(&self, config: &Value, tol: f64) -> String {
        let header = json!({
            "tool": "ergolab",
            "version": env!("CARGO_PKG_VERSION"),
            "scenario": self.scenario,
            "config": config,
            "tol": tol,
            "traceability": traceability(),
            "passed": self.passed(),
            "failures": self.failures,
            "summary": self.summary,
        });
        let mut out = format!("# {header}\n");
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells"));
        out
    }
}

/// Scenario → library operations it exercises.
pub fn traceability() -> Value {
    json!({
        "axioms": ["verify_axioms", "solve_haar"],
        "haar": ["solve_haar", "check_state", "traciality_residual"],
        "cesaro": ["right_conv_operator", "fixed_point_projection", "cesaro_convergence", "cesaro_check"],
        "iterates": ["right_conv_operator", "stein_even_iterates"],
        "idempotents": ["cesaro_limit_functional", "quantum_subgroups", "idempotent_scan"],
        "lp": ["make_context", "conv_operator_lp", "fixed_point_projection_lp", "cesaro_lp_residuals"],
        "semigroup": ["validate_generator", "time_average", "semigroup_limits", "as_certificate"],
        "blocks": ["su_q2_blocks", "modular_maps", "antipode_block", "verify_commutation_relations"],
        "list": ["builtin_catalog"],
    })
}

/// Shortest round-trip float formatting, so identical runs give identical bytes.
pub fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}
