// Alignment rendering model: a pure function of the plan artifact.
//
// Color legend: identical nouns blue, substituted nouns purple, nouns
// with changed modifiers green, nouns only in the source caption red.
// Non-noun tokens inherit blue when both sides agree on them verbatim;
// everything else stays neutral. Hover partners come straight from the
// word-alignment pairs.

import { PlanJson, SUPPORTED_PLAN_SCHEMA } from './types.js';

export type TokenColor = 'blue' | 'purple' | 'green' | 'red' | 'neutral';

export interface AnnotatedToken {
  text: string;
  color: TokenColor;
  partner: string | null; // aligned token on the other side, if any
}

export interface AlignmentView {
  source: AnnotatedToken[];
  target: AnnotatedToken[];
}

export const VERDICT_COLORS: Record<string, TokenColor> = {
  IDENTICAL: 'blue',
  SUBSTITUTED: 'purple',
  MODIFIER_CHANGED: 'green',
  DELETED: 'red',
};

export class PlanSchemaError extends Error {}

export function buildAlignmentView(plan: PlanJson): AlignmentView {
  if (plan.schema_version !== SUPPORTED_PLAN_SCHEMA) {
    throw new PlanSchemaError(
      `plan schema ${plan.schema_version} not supported (expected ${SUPPORTED_PLAN_SCHEMA})`,
    );
  }
  const pairs = plan.alignment ?? [];
  const forward = new Map<number, number>();
  const backward = new Map<number, number>();
  for (const [i, j] of pairs) {
    if (!forward.has(i)) forward.set(i, j);
    if (!backward.has(j)) backward.set(j, i);
  }

  const sourceColors = new Map<number, TokenColor>();
  const targetColors = new Map<number, TokenColor>();
  for (const entry of plan.keep) {
    sourceColors.set(entry.source.head, VERDICT_COLORS[entry.verdict]);
    if (entry.verdict === 'IDENTICAL') {
      const j = forward.get(entry.source.head);
      if (j !== undefined) targetColors.set(j, 'blue');
    }
  }
  for (const entry of plan.alter) {
    const color = VERDICT_COLORS[entry.verdict];
    sourceColors.set(entry.source.head, color);
    targetColors.set(entry.target.head, color);
    if (entry.verdict === 'MODIFIER_CHANGED') {
      for (const m of entry.source.modifiers) sourceColors.set(m, 'green');
      for (const m of entry.target.modifiers) targetColors.set(m, 'green');
    }
  }

  const annotate = (
    tokens: string[],
    others: string[],
    colors: Map<number, TokenColor>,
    partnerOf: Map<number, number>,
  ): AnnotatedToken[] =>
    tokens.map((text, index) => {
      const partnerIndex = partnerOf.get(index);
      const partner = partnerIndex === undefined ? null : others[partnerIndex];
      let color = colors.get(index);
      if (color === undefined) {
        // plain words: blue when both captions share them verbatim
        color = partner !== null && partner === text ? 'blue' : 'neutral';
      }
      return { text, color, partner };
    });

  return {
    source: annotate(plan.source_tokens, plan.target_tokens, sourceColors, forward),
    target: annotate(plan.target_tokens, plan.source_tokens, targetColors, backward),
  };
}
