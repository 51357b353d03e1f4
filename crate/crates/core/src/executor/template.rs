use super::ExecError;

pub const PLACEHOLDERS: [&str; 6] = ["ligand", "receptor", "out", "cpu", "seed", "config"];

/// Values substituted into a command template. `config` is optional because
/// a run may not have a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateValues {
    pub ligand: String,
    pub receptor: String,
    pub out: String,
    pub cpu: usize,
    pub seed: u64,
    pub config: Option<String>,
}

impl TemplateValues {
    fn lookup(&self, name: &str) -> Result<String, ExecError> {
        Ok(match name {
            "ligand" => self.ligand.clone(),
            "receptor" => self.receptor.clone(),
            "out" => self.out.clone(),
            "cpu" => self.cpu.to_string(),
            "seed" => self.seed.to_string(),
            "config" => self
                .config
                .clone()
                .ok_or_else(|| ExecError::MissingValue("config".into()))?,
            other => return Err(ExecError::UnknownPlaceholder(other.to_string())),
        })
    }
}

/// Names of the `{placeholders}` used by a template.
pub fn placeholders_in(template: &str) -> Vec<String> {
    let mut found = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let Some(len) = rest[open + 1..].find('}') else { break };
        found.push(rest[open + 1..open + 1 + len].to_string());
        rest = &rest[open + 2 + len..];
    }
    found
}

/// Splits the template on whitespace, then substitutes placeholders inside
/// each token. A substituted value never splits into more arguments and is
/// never seen by a shell.
pub fn expand_template(template: &str, values: &TemplateValues) -> Result<Vec<String>, ExecError> {
    let tokens: Vec<&str> = template.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(ExecError::EmptyTemplate);
    }
    tokens
        .into_iter()
        .map(|token| {
            let mut out = String::new();
            let mut rest = token;
            while let Some(open) = rest.find('{') {
                let Some(len) = rest[open + 1..].find('}') else { break };
                out.push_str(&rest[..open]);
                out.push_str(&values.lookup(&rest[open + 1..open + 1 + len])?);
                rest = &rest[open + 2 + len..];
            }
            out.push_str(rest);
            Ok(out)
        })
        .collect()
}
