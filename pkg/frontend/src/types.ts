/** Wire types, mirroring the questionnaire service API exactly. */

export interface CodeRef {
  system: string;
  value: string;
  label: string;
  general: boolean;
}

export interface ViewItem {
  conditionId: string;
  label: string;
  checked: boolean;
  chosenCode: CodeRef | null;
  availableCodes: CodeRef[];
  isNew: boolean;
  hasStar: boolean;
}

export interface ViewPanel {
  category: string;
  color: string;
  items: ViewItem[];
}

export interface QuestionnaireView {
  panels: ViewPanel[];
}

export interface QuestionnaireDiff {
  appeared: string[];
  disappeared: string[];
  unchanged: string[];
}

export interface RecommendationAction {
  verb: string;
  target: string | null;
  text: string;
}

export interface Recommendation {
  ruleId: string;
  action: RecommendationAction;
  triggeringConditions: string[];
}

export interface RulebaseSummary {
  id: string;
  ruleCount: number;
  clinicalConditionCount: number;
}

export interface SessionCreated {
  sessionId: string;
  view: QuestionnaireView;
}

export interface SessionState {
  view: QuestionnaireView;
  recommendations: Recommendation[];
}

export interface MutationResult extends SessionState {
  diff: QuestionnaireDiff;
}

export interface ErrorEnvelope {
  code: string;
  message: string;
  detail?: unknown;
}

export interface AppConfig {
  apiBaseUrl: string;
}
