//! Source text in, channels out.

use thiserror::Error;

use crate::affine::Bindings;
use crate::front::{analyze, parse, ArrayReference, FrontError, Program, RepetitionSpace, Span};
use crate::spec_doc::SpecDocument;
use crate::synth::{rewrite_program, synthesize_all, ChannelReport, SynthError, SynthOptions};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Front(#[from] FrontError),
    #[error("{span}: {code}: {source}", code = source.code())]
    Synth { span: Span, source: SynthError },
}

impl PipelineError {
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::Front(e) => e.kind.code(),
            PipelineError::Synth { source, .. } => source.code(),
        }
    }

    pub fn span(&self) -> Span {
        match self {
            PipelineError::Front(e) => e.span,
            PipelineError::Synth { span, .. } => *span,
        }
    }

    /// The message without position or code.
    pub fn message(&self) -> String {
        match self {
            PipelineError::Front(e) => e.message.clone(),
            PipelineError::Synth { source, .. } => source.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub program: Program,
    pub bindings: Bindings,
    pub repetition: RepetitionSpace,
    pub references: Vec<ArrayReference>,
    pub channels: Vec<ChannelReport>,
}

impl Analysis {
    pub fn spec(&self) -> SpecDocument {
        SpecDocument::new(
            &self.program,
            &self.repetition,
            &self.bindings,
            &self.channels,
        )
    }

    pub fn rewrite(&self) -> String {
        let chans: Vec<_> = self.channels.iter().map(|r| r.channel.clone()).collect();
        rewrite_program(&self.program, &chans)
    }
}

pub fn run(
    src: &str,
    bindings: &Bindings,
    options: &SynthOptions,
) -> Result<Analysis, PipelineError> {
    let program = parse(src)?;
    let (repetition, references) = analyze(&program, bindings)?;
    let channels = synthesize_all(&references, &repetition, bindings, options)
        .map_err(|(span, source)| PipelineError::Synth { span, source })?;
    Ok(Analysis {
        program,
        bindings: bindings.clone(),
        repetition,
        references,
        channels,
    })
}
