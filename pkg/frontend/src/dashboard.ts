/**
 * Agreement dashboard: fetches the server's pairwise kappa values and
 * renders them verbatim (no client-side recomputation).
 */

import { AnnotationApi, AgreementPair } from "./api.js";
import { renderAgreement } from "./render.js";

export class Dashboard {
  private pairs: AgreementPair[] = [];

  constructor(private readonly api: AnnotationApi) {}

  async refresh(): Promise<AgreementPair[]> {
    const body = await this.api.agreement();
    this.pairs = body.pairs;
    return this.pairs;
  }

  getPairs(): AgreementPair[] {
    return this.pairs;
  }

  html(): string {
    return renderAgreement(this.pairs);
  }
}
