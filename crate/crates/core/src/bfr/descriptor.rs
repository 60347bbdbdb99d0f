//! System descriptor: a JSON document that fully determines a code
//! instance — field, construction, parameters, design, sub-code and the
//! evaluation-point generator. Rebuilding from a descriptor is
//! deterministic; an explicit encoding-matrix override may replace the
//! generator-derived matrix (verification treats a corrupted override as a
//! broken deployment, not a build error).

use serde::{Deserialize, Serialize};

use crate::design::Design;
use crate::field::{FieldError, FieldSpec, Matrix};
use crate::regen::{RegenParams, SubCode};
use crate::Field;

use super::{BfrError, BfrSystem, Construction, SystemKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptorParams {
    pub n: usize,
    pub b: usize,
    #[serde(rename = "M")]
    pub file_len: usize,
    pub k: usize,
    pub rho: usize,
    pub alpha: usize,
    pub d: usize,
    pub sigma: usize,
    pub beta: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubSpec {
    #[serde(flatten)]
    pub params: RegenParams,
    /// Optional explicit encoding matrix (base-field values): Psi for MBR,
    /// Phi for MSR, the generator matrix for MDS.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<u64>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GabSpec {
    pub length: usize,
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descriptor {
    pub field: FieldSpec,
    pub construction: Construction,
    pub params: DescriptorParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<Design>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub: Option<SubSpec>,
    pub psi_generator: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gabidulin: Option<GabSpec>,
}

impl Descriptor {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    pub fn from_json(s: &str) -> Result<Descriptor, BfrError> {
        serde_json::from_str(s)
            .map_err(|e| BfrError::DescriptorMismatch(format!("invalid descriptor JSON: {e}")))
    }
}

fn matrix_values(m: &Matrix) -> Vec<Vec<u64>> {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(|e| e.words()[0] as u64).collect())
        .collect()
}

fn matrix_from_values(field: &Field, values: &[Vec<u64>]) -> Result<Matrix, BfrError> {
    let rows = values.len();
    let cols = values.first().map_or(0, |r| r.len());
    let mut data = Vec::with_capacity(rows * cols);
    for row in values {
        if row.len() != cols {
            return Err(BfrError::DescriptorMismatch(
                "ragged encoding matrix".into(),
            ));
        }
        for &v in row {
            data.push(field.element(v)?);
        }
    }
    Ok(Matrix::new(field.clone(), rows, cols, data)?)
}

impl BfrSystem {
    pub fn descriptor(&self) -> Descriptor {
        let p = self.params();
        Descriptor {
            field: self.field().spec(),
            construction: p.construction,
            params: DescriptorParams {
                n: p.n,
                b: p.b,
                file_len: p.file_len,
                k: p.k,
                rho: p.rho,
                alpha: p.alpha,
                d: p.d,
                sigma: p.sigma,
                beta: p.beta,
            },
            design: self.design().cloned(),
            sub: self.sub_params().map(|params| SubSpec {
                params: *params,
                matrix: None,
            }),
            psi_generator: self.generator(),
            gabidulin: self.outer_code().map(|g| GabSpec {
                length: g.length(),
                dimension: g.dimension(),
            }),
        }
    }

    /// The canonical encoding-matrix values of the sub-code, for building
    /// descriptor overrides.
    pub fn sub_matrix_values(&self) -> Option<Vec<Vec<u64>>> {
        match &self.kind {
            SystemKind::Transpose { .. } => None,
            SystemKind::Plane { core } | SystemKind::GabPlane { core, .. } => {
                Some(matrix_values(core.sub.encoding_matrix()))
            }
        }
    }

    pub fn from_descriptor(desc: &Descriptor) -> Result<BfrSystem, BfrError> {
        let field = Field::from_spec(&desc.field)?;
        let system = match desc.construction {
            Construction::Transpose => BfrSystem::transpose(field, desc.params.n, desc.params.k)?,
            Construction::PlanePlacement => {
                let design = desc
                    .design
                    .clone()
                    .ok_or_else(|| BfrError::DescriptorMismatch("missing design".into()))?;
                let sub = desc
                    .sub
                    .as_ref()
                    .ok_or_else(|| BfrError::DescriptorMismatch("missing sub-code".into()))?;
                let sub_code = build_sub(&field, sub, desc.psi_generator)?;
                BfrSystem::assemble_plane(field, design, sub_code)?
            }
            Construction::GabidulinPlane => {
                if !field.is_extension() {
                    return Err(BfrError::Field(FieldError::NotExtension));
                }
                let design = desc
                    .design
                    .clone()
                    .ok_or_else(|| BfrError::DescriptorMismatch("missing design".into()))?;
                let sub = desc
                    .sub
                    .as_ref()
                    .ok_or_else(|| BfrError::DescriptorMismatch("missing sub-code".into()))?;
                let gab_spec = desc
                    .gabidulin
                    .as_ref()
                    .ok_or_else(|| BfrError::DescriptorMismatch("missing outer code".into()))?;
                let sub_code = build_sub(&field, sub, desc.psi_generator)?;
                let gab = crate::gabidulin::GabidulinCode::new(
                    field.clone(),
                    gab_spec.length,
                    gab_spec.dimension,
                )?;
                BfrSystem::assemble_gab_plane(field, design, sub_code, gab, desc.params.rho)?
            }
        };
        check_params(desc, &system)?;
        Ok(system)
    }
}

fn build_sub(field: &Field, spec: &SubSpec, generator: u64) -> Result<SubCode, BfrError> {
    match &spec.matrix {
        None => Ok(SubCode::new(field.clone(), spec.params, generator)?),
        Some(values) => {
            let matrix = matrix_from_values(field, values)?;
            Ok(SubCode::with_matrix(
                field.clone(),
                spec.params,
                generator,
                matrix,
            )?)
        }
    }
}

fn check_params(desc: &Descriptor, system: &BfrSystem) -> Result<(), BfrError> {
    let d = &desc.params;
    let p = system.params();
    for (name, declared, derived) in [
        ("n", d.n, p.n),
        ("b", d.b, p.b),
        ("M", d.file_len, p.file_len),
        ("k", d.k, p.k),
        ("rho", d.rho, p.rho),
        ("alpha", d.alpha, p.alpha),
        ("d", d.d, p.d),
        ("sigma", d.sigma, p.sigma),
        ("beta", d.beta, p.beta),
    ] {
        if declared != derived {
            return Err(BfrError::DescriptorMismatch(format!(
                "{name}: descriptor says {declared}, construction derives {derived}"
            )));
        }
    }
    Ok(())
}
