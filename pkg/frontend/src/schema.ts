/**
 * Client-side mirror of the annotation schema.
 *
 * The widgets only ever construct values from these enums and ranges, and
 * validateQuestionnaire re-checks a payload before it is POSTed so the
 * server's 422 path is a backstop, not the primary guard.
 */

export enum TaskKind {
  Assessment = 'assessment',
  Comparison = 'comparison',
  Suggestion = 'suggestion',
  Detection = 'detection',
}

export enum Preference {
  ABetter = 'a_better',
  BBetter = 'b_better',
  Similar = 'similar',
}

export interface DimensionInfo {
  id: string;
  label: string;
}

export const DIMENSIONS: readonly DimensionInfo[] = [
  { id: 'overall_quality', label: 'Overall Quality' },
  { id: 'intelligibility', label: 'Intelligibility' },
  { id: 'distortion', label: 'Distortion' },
  { id: 'speech_rate', label: 'Speech Rate' },
  { id: 'dynamic_range', label: 'Dynamic Range' },
  { id: 'emotional_impact', label: 'Emotional Impact' },
  { id: 'artistic_expression', label: 'Artistic Expression' },
  { id: 'subjective_experience', label: 'Subjective Experience' },
] as const;

export const SCORE_VALUES: readonly number[] = [1, 2, 3, 4, 5];

/** Speech rate reads slow(1) to fast(5); every other dimension is quality. */
export const RATE_LABELS: Readonly<Record<number, string>> = {
  1: 'Slow',
  2: 'Slightly Slow',
  3: 'Appropriate',
  4: 'Slightly Fast',
  5: 'Fast',
};

export const PREFERENCE_LABELS: Readonly<Record<Preference, string>> = {
  [Preference.ABetter]: 'A is better',
  [Preference.BBetter]: 'B is better',
  [Preference.Similar]: 'Similar',
};

export const GENDERS = ['female', 'male', 'unknown'] as const;
export const DISTORTION_TYPES = [
  'unknown',
  'none',
  'artifacts',
  'timbre',
  'jitter',
  'background noise',
  'missing segments',
] as const;
export const EMOTION_TYPES = [
  'unknown',
  'neutral',
  'happy',
  'sad',
  'angry',
  'surprised',
  'fearful',
] as const;

export const OPEN_FIELDS = [
  { id: 'distortion_duration', label: 'Distortion duration' },
  { id: 'distortion_severity', label: 'Distortion severity' },
  { id: 'perceptual_description', label: 'Perceptual description' },
  { id: 'speaker_age', label: 'Speaker age' },
  { id: 'speaking_tone', label: 'Speaking tone' },
] as const;

export interface ScoreEntry {
  dimension: string;
  value: number;
  qualifier: string | null;
}

export interface PreferenceEntry {
  dimension: string;
  preference: Preference;
}

export interface QuestionnaireFields {
  scores: Array<ScoreEntry | PreferenceEntry>;
  metadata: { distortion_type: string; emotion_type: string; gender: string };
  open_fields: Record<string, string>;
}

const DIMENSION_IDS = new Set(DIMENSIONS.map((d) => d.id));
const PREFERENCE_VALUES = new Set<string>(Object.values(Preference));

/**
 * Mirrors the server-side rules for the tasks this UI handles; returns every
 * violation so the form can highlight all offending fields at once.
 */
export function validateQuestionnaire(fields: QuestionnaireFields, task: TaskKind): string[] {
  const violations: string[] = [];
  const seen = new Set<string>();

  for (const entry of fields.scores) {
    if (!DIMENSION_IDS.has(entry.dimension)) {
      violations.push(`unknown dimension ${entry.dimension}`);
      continue;
    }
    if (seen.has(entry.dimension)) {
      violations.push(`duplicate dimension ${entry.dimension}`);
    }
    seen.add(entry.dimension);
    if (task === TaskKind.Comparison) {
      const preference = (entry as PreferenceEntry).preference;
      if (!PREFERENCE_VALUES.has(preference)) {
        violations.push(`${entry.dimension}: preference must be A/B/Similar`);
      }
    } else {
      const value = (entry as ScoreEntry).value;
      if (!Number.isInteger(value) || value < 1 || value > 5) {
        violations.push(`${entry.dimension}: score ${value} outside 1..5`);
      }
    }
  }

  if (task === TaskKind.Assessment || task === TaskKind.Comparison) {
    for (const dimension of DIMENSIONS) {
      if (!seen.has(dimension.id)) {
        violations.push(`missing dimension ${dimension.id}`);
      }
    }
  }
  if (!GENDERS.includes(fields.metadata.gender as (typeof GENDERS)[number])) {
    violations.push(`gender ${fields.metadata.gender} not in schema`);
  }
  return violations;
}

/** Dimensions still unset in a partially filled form (for highlighting). */
export function missingDimensions(chosen: ReadonlyMap<string, unknown>): string[] {
  return DIMENSIONS.filter((d) => !chosen.has(d.id)).map((d) => d.id);
}
